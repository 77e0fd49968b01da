"""Degenerate weight system: approximate distance, power weight, ball radius.

θ is a C² scale-invariant smoothed minimum of the per-face distances to Σ′
(exact distance wherever the two smallest face distances are separated,
smoothly blended across near-ties, capped at 4 r0 beyond the collar).  The
weight is ρ = ρ̃(θ)^N with ρ̃(t) = t below r1, 1 above r0 and a C² monotone
quintic Hermite transition in between; the Hölder-ball radius is φ = θ/2 on
the collar.  All construction invariants are checked node-by-node at build
time and the measured derivative constants are kept on the object.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import ConfigurationError, DomainGrid, NodeRole
from .mesh import euclidean_distance_to_sigma_prime, sigma_prime_face_distances


# -------------------- smoothed minimum --------------------

_SMIN_KAPPA = 0.08  # relative blend half-width; dip per blend is 3*kappa/8


def _even_abs_smooth(t: np.ndarray, kappa: float) -> np.ndarray:
    """C² even approximation of |t|: exact for |t| >= kappa."""
    t = np.asarray(t, dtype=float)
    out = np.abs(t)
    inside = out < kappa
    u = t[inside] / kappa
    out[inside] = kappa * (0.375 + 0.75 * u * u - 0.125 * u ** 4)
    return out


def smooth_min(a: np.ndarray, b: np.ndarray, kappa: float = _SMIN_KAPPA) -> np.ndarray:
    """C², scale-invariant soft minimum.

    Equals min(a, b) when |a-b| >= kappa (a+b); dips below by at most a
    relative 3 kappa / 8 at a tie.  Positivity-preserving for positive inputs.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = a + b
    pos = s > 0
    safe = np.where(pos, s, 1.0)
    out = 0.5 * (s - safe * _even_abs_smooth((a - b) / safe, kappa))
    return np.where(pos, out, np.minimum(a, b))


def smooth_min_many(values: list[np.ndarray], kappa: float = _SMIN_KAPPA) -> np.ndarray:
    """Pairwise-tree smoothed minimum; opposite faces first, then across axes."""
    vals = list(values)
    while len(vals) > 1:
        nxt = []
        for k in range(0, len(vals) - 1, 2):
            nxt.append(smooth_min(vals[k], vals[k + 1], kappa))
        if len(vals) % 2 == 1:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def smooth_cap(t: np.ndarray, cap: float, kappa: float = _SMIN_KAPPA) -> np.ndarray:
    """min(t, cap), smoothed: C² saturation at the cap level."""
    return smooth_min(np.asarray(t, dtype=float), np.full_like(np.asarray(t, dtype=float), cap), kappa)


# -------------------- radial profile of the weight --------------------

def rho_profile(t: np.ndarray, r1: float, r0: float) -> np.ndarray:
    """ρ̃: identity below r1, one above r0, C² monotone quintic in between."""
    t = np.asarray(t, dtype=float)
    out = np.where(t <= r1, t, 1.0)
    mid = (t > r1) & (t < r0)
    if np.any(mid):
        w = r0 - r1
        s = (t[mid] - r1) / w
        # quintic with p(0)=r1, p'(0)=w (slope 1 in t), p''(0)=0,
        # p(1)=1, p'(1)=0, p''(1)=0
        v0, m0 = r1, w
        rise = 1.0 - v0 - m0
        a3 = 10.0 * rise - 6.0 * m0 + 4.0 * m0
        # solve the 3x3 system explicitly
        # a3 + a4 + a5 = rise ; 3a3 + 4a4 + 5a5 = -m0 ; 6a3 + 12a4 + 20a5 = 0
        a5 = (6.0 * rise + 3.0 * m0) / 2.0 + 0.0
        # direct solve:
        mat = np.array([[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [6.0, 12.0, 20.0]])
        rhs = np.array([rise, -m0, 0.0])
        c3, c4, c5 = np.linalg.solve(mat, rhs)
        out[mid] = v0 + m0 * s + c3 * s ** 3 + c4 * s ** 4 + c5 * s ** 5
    return out


def _check_profile_monotone(r1: float, r0: float) -> None:
    s = np.linspace(r1, r0, 4001)
    p = rho_profile(s, r1, r0)
    if np.any(np.diff(p) < -1e-12):
        raise ConfigurationError(
            f"rho transition on [{r1}, {r0}] is not monotone; widen the interval")


# -------------------- the weight system --------------------

class WeightConstructionError(ValueError):
    """A build-time weight invariant failed; message carries node locations."""


@dataclass
class WeightSystem:
    grid: DomainGrid
    epsilon: float
    r0: float
    r1: float
    power: int
    theta: np.ndarray
    rho: np.ndarray
    phi: np.ndarray
    distance: np.ndarray          # exact Euclidean distance to Σ′
    theta_cut: float              # solver truncation level (2h)
    solver_mask: np.ndarray       # nodes carrying solver unknowns/support
    measured_c1: float = 0.0
    measured_c2: float = 0.0
    measured_weight_bound: float = 0.0   # sup |phi^k rho^{-1} D^k rho|, k<=2
    report: dict = field(default_factory=dict)

    @property
    def rho_solver(self) -> np.ndarray:
        """ρ truncated to the solver support (zero where θ < θ_cut)."""
        return self.rho * self.solver_mask


def build_weights(grid: DomainGrid, epsilon: float = 0.1, r0: float = 0.3,
                  r1: float = 0.15, power: int = 8,
                  theta_cut_factor: float = 2.0) -> WeightSystem:
    """Construct θ, ρ, φ and verify every construction invariant node-by-node."""
    diam = float(np.linalg.norm(grid.extents))
    if not (0 < r1 < r0):
        raise ConfigurationError(f"need 0 < r1 < r0, got r1={r1}, r0={r0}")
    if not (r0 < diam / 4):
        raise ConfigurationError(f"need r0 < diameter/4 = {diam / 4:.4f}, got r0={r0}")
    if not (0 < epsilon <= 0.2):
        raise ConfigurationError(f"need epsilon in (0, 0.2], got {epsilon}")
    if power < 4:
        raise ConfigurationError(f"need weight power N >= 4, got {power}")
    h = grid.h
    if r0 < 4 * h:
        raise ConfigurationError(
            f"resolution too small to host the weight collar: r0 >= 4h required, "
            f"r0={r0}, 4h={4 * h:.5f}")
    _check_profile_monotone(r1, r0)

    dist = euclidean_distance_to_sigma_prime(grid)
    faces = sigma_prime_face_distances(grid)
    theta = smooth_min_many(faces)
    theta = smooth_cap(theta, 4.0 * r0)
    rho = rho_profile(theta, r1, r0) ** power
    phi = 0.5 * np.minimum(theta, 4.0 * r0)

    theta_cut = theta_cut_factor * h
    mask = (theta >= theta_cut)
    mask &= (grid.roles != NodeRole.SIGMA_PRIME) & (grid.roles != NodeRole.GAMMA)

    ws = WeightSystem(grid=grid, epsilon=epsilon, r0=r0, r1=r1, power=power,
                      theta=theta, rho=rho, phi=phi, distance=dist,
                      theta_cut=theta_cut, solver_mask=mask)
    verify_weight_invariants(ws, raise_on_failure=True)
    return ws


def _fmt_nodes(grid: DomainGrid, idx: np.ndarray, limit: int = 5) -> str:
    pts = [tuple(np.round(grid.coords[i], 5)) for i in idx[:limit]]
    more = "" if len(idx) <= limit else f" (+{len(idx) - limit} more)"
    return f"{pts}{more}"


def verify_weight_invariants(ws: WeightSystem, raise_on_failure: bool = False,
                             c1_bound: float = 2.0, c2_bound: float = 50.0,
                             weight_bound: float = 200.0) -> dict:
    """Node-by-node checks of the construction inequalities.

    * (1-ε) d <= θ <= (1+ε) d on the collar {d < 4 r0}
    * 1/C1 <= |Dθ| <= C1 and θ |D²θ| <= C2 on {2h < θ < r0}
    * ρ = 1 on {θ > r0}, ρ = θ^N on {θ < r1}
    * φ = θ/2 on {θ < 4 r0} and 0 < φ < 1
    * |φ^k ρ^{-1} D^k ρ| <= C for k <= 2 (where ρ > 0)
    Measured constants are stored on the WeightSystem.
    """
    g = ws.grid
    report: dict = {}
    failures: list[str] = []

    collar = ws.distance < 4.0 * ws.r0
    lo = (1.0 - ws.epsilon) * ws.distance
    hi = (1.0 + ws.epsilon) * ws.distance
    bad = collar & ((ws.theta < lo - 1e-12) | (ws.theta > hi + 1e-12))
    report["theta_vs_distance_violations"] = int(bad.sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(ws.distance > 0, ws.theta / np.where(ws.distance > 0, ws.distance, 1.0), 1.0)
    report["theta_over_d_min"] = float(ratio[collar & (ws.distance > 0)].min())
    report["theta_over_d_max"] = float(ratio[collar & (ws.distance > 0)].max())
    if bad.any():
        failures.append("theta approximation bound (1±ε)d violated at "
                        + _fmt_nodes(g, np.flatnonzero(bad)))

    ops = g.stencils
    grad = np.stack([ops.d1(a) @ ws.theta for a in range(g.dim)])
    grad_norm = np.linalg.norm(grad, axis=0)
    hess_sq = np.zeros(g.n_nodes)
    for a in range(g.dim):
        for b in range(g.dim):
            mult = 1.0
            hab = ops.d2(min(a, b), max(a, b)) @ ws.theta
            hess_sq += mult * hab ** 2
    hess_norm = np.sqrt(hess_sq)
    band = (ws.theta > 2 * g.h) & (ws.theta < ws.r0)
    if band.any():
        c1 = float(max(grad_norm[band].max(), 1.0 / grad_norm[band].min()))
        c2 = float((ws.theta * hess_norm)[band].max())
    else:
        c1, c2 = 1.0, 0.0
    ws.measured_c1, ws.measured_c2 = c1, c2
    report["measured_c1"], report["measured_c2"] = c1, c2
    if c1 > c1_bound:
        failures.append(f"gradient bound C1={c1:.3f} exceeds {c1_bound} on the band")
    if c2 > c2_bound:
        failures.append(f"curvature bound C2={c2:.3f} exceeds {c2_bound} on the band")

    outer = ws.theta > ws.r0
    if outer.any() and np.max(np.abs(ws.rho[outer] - 1.0)) > 1e-12:
        failures.append("rho != 1 somewhere on {theta > r0}")
    inner = ws.theta < ws.r1
    if inner.any():
        dev = np.max(np.abs(ws.rho[inner] - ws.theta[inner] ** ws.power))
        if dev > 1e-12:
            failures.append("rho != theta^N somewhere on {theta < r1}")
    report["rho_plateau_ok"] = True

    infl = ws.theta < 4.0 * ws.r0
    if np.max(np.abs(ws.phi[infl] - 0.5 * ws.theta[infl])) > 1e-12:
        failures.append("phi != theta/2 on the collar")
    pos = ws.theta > 0
    if pos.any() and ws.phi[pos].min() <= 0:
        failures.append("phi must be positive away from Σ′")
    if ws.phi.max() >= 1.0:
        failures.append("phi must stay below 1")
    report["phi_min"], report["phi_max"] = float(ws.phi[pos].min()), float(ws.phi.max())

    # |phi^k rho^{-1} D^k rho| for k = 1, 2 where rho > 0
    drho = np.stack([ops.d1(a) @ ws.rho for a in range(g.dim)])
    d2rho = np.zeros(g.n_nodes)
    for a in range(g.dim):
        for b in range(g.dim):
            d2rho += (ops.d2(min(a, b), max(a, b)) @ ws.rho) ** 2
    d2rho = np.sqrt(d2rho)
    where = ws.rho > 0
    q1 = np.zeros(g.n_nodes)
    q2 = np.zeros(g.n_nodes)
    q1[where] = ws.phi[where] * np.linalg.norm(drho, axis=0)[where] / ws.rho[where]
    q2[where] = ws.phi[where] ** 2 * d2rho[where] / ws.rho[where]
    wb = float(max(q1.max(), q2.max()))
    ws.measured_weight_bound = wb
    report["measured_weight_derivative_bound"] = wb
    if wb > weight_bound:
        failures.append(f"weighted rho-derivative bound {wb:.1f} exceeds {weight_bound}")

    report["failures"] = failures
    ws.report = report
    if failures and raise_on_failure:
        raise WeightConstructionError(
            "; ".join(failures) + " — retry with smaller epsilon or larger r0")
    return report


# -------------------- weighted norms --------------------

def _volume_measure(ws: WeightSystem, sqrt_det: np.ndarray | None = None) -> np.ndarray:
    w = ws.grid.vol_weight
    return w if sqrt_det is None else w * sqrt_det


def _component_square(values: np.ndarray) -> np.ndarray:
    """Pointwise squared magnitude for (N,), (C,N) stacks, with multiplicity."""
    if values.ndim == 1:
        return values ** 2
    # tensor stack: off-diagonal components count twice (flat Frobenius)
    from .fields import sym_multiplicity
    dim = {1: 1, 3: 2, 6: 3}[values.shape[0]]
    mult = sym_multiplicity(dim)
    return np.einsum("c,cn->n", mult, values ** 2)


def weighted_norm(ws: WeightSystem, values: np.ndarray, kind: str,
                  sqrt_det: np.ndarray | None = None,
                  system=None) -> float:
    """Weighted norms of nodal fields.

    kinds: 'l2_rho', 'l2_rho_inv', 'h1_rho', 'h2_rho' on volume fields;
    'l2_rho_sigma' on Σ fields; 'boundary_energy' (the extension-energy inner
    product) and 'boundary_energy_dual' require an assembled system.
    """
    g = ws.grid
    if kind in ("boundary_energy", "boundary_energy_dual"):
        if system is None:
            raise OrderingError(
                f"norm kind {kind!r} needs the assembled linearized system")
        if kind == "boundary_energy":
            return system.boundary_energy_norm(values)
        return system.boundary_dual_norm(values)
    if kind == "l2_rho_sigma":
        sidx = g.sigma_idx
        w = g.surf_weight[sidx] * (1.0 if sqrt_det is None else sqrt_det)
        return float(np.sqrt(np.sum(w * ws.rho[sidx] * np.asarray(values) ** 2)))

    w = _volume_measure(ws, sqrt_det)
    sq = _component_square(np.asarray(values, dtype=float))
    if kind == "l2_rho":
        return float(np.sqrt(np.sum(w * ws.rho * sq)))
    if kind == "l2_rho_inv":
        with np.errstate(divide="ignore"):
            inv = np.where(ws.rho > 0, 1.0 / np.where(ws.rho > 0, ws.rho, 1.0), 0.0)
        contributes = sq > 0
        if np.any(contributes & (ws.rho == 0)):
            return float("inf")
        return float(np.sqrt(np.sum(w * inv * sq)))
    if kind in ("h1_rho", "h2_rho"):
        total = np.sum(w * ws.rho * sq)
        vals = np.asarray(values, dtype=float)
        stack = vals[None, :] if vals.ndim == 1 else vals
        ops = g.stencils
        for row in stack:
            for a in range(g.dim):
                total += np.sum(w * ws.rho * (ops.d1(a) @ row) ** 2)
            if kind == "h2_rho":
                for a in range(g.dim):
                    for b in range(g.dim):
                        total += np.sum(w * ws.rho * (ops.d2(min(a, b), max(a, b)) @ row) ** 2)
        return float(np.sqrt(total))
    raise ValueError(f"unknown norm kind {kind!r}")


class OrderingError(RuntimeError):
    """An operation was requested before its prerequisites were built."""


def weighted_sup(ws: WeightSystem, values: np.ndarray, r: float, s: float,
                 derivatives: int = 2) -> float:
    """sup over nodes of φ^r ρ^s Σ_{j<=derivatives} φ^j |D^j field|.

    Evaluated on the solver support (ρ > 0 there); the ρ^s factor with s < 0
    is meaningful only where fields decay, which the support mask enforces.
    """
    g = ws.grid
    vals = np.asarray(values, dtype=float)
    stack = vals[None, :] if vals.ndim == 1 else vals
    ops = g.stencils
    mag = np.sqrt(np.einsum("cn,cn->n", stack, stack))
    total = mag.copy()
    if derivatives >= 1:
        d1sq = np.zeros(g.n_nodes)
        for row in stack:
            for a in range(g.dim):
                d1sq += (ops.d1(a) @ row) ** 2
        total += ws.phi * np.sqrt(d1sq)
    if derivatives >= 2:
        d2sq = np.zeros(g.n_nodes)
        for row in stack:
            for a in range(g.dim):
                for b in range(g.dim):
                    d2sq += (ops.d2(min(a, b), max(a, b)) @ row) ** 2
        total += ws.phi ** 2 * np.sqrt(d2sq)
    where = ws.rho > 0
    weight = np.zeros(g.n_nodes)
    weight[where] = ws.phi[where] ** r * ws.rho[where] ** s
    return float(np.max(weight * total))


def hardy_ratio(ws: WeightSystem, u: np.ndarray,
                sqrt_det: np.ndarray | None = None) -> float:
    """∫ u² θ^{-2} ρ  /  ||u ρ^{1/2}||²_{H¹}; u must vanish on Σ′ nodes."""
    g = ws.grid
    u = np.asarray(u, dtype=float)
    sp_idx = g.sigma_prime_idx
    if np.any(u[sp_idx] != 0.0):
        raise ValueError("hardy_ratio requires u to vanish on Σ′ nodes")
    w = _volume_measure(ws, sqrt_det)
    pos = ws.theta > 0
    num = np.sum((w * u * u)[pos] * ws.rho[pos] / ws.theta[pos] ** 2)
    wfield = u * np.sqrt(ws.rho)
    den = np.sum(w * wfield ** 2)
    for a in range(g.dim):
        den += np.sum(w * (g.stencils.d1(a) @ wfield) ** 2)
    if den == 0:
        raise ZeroDivisionError("hardy_ratio undefined for the zero field")
    return float(num / den)
