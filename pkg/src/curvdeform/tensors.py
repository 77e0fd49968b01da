"""Nonlinear curvature of a nodal metric field.

Christoffel symbols, Ricci and scalar curvature on the whole grid, and the
boundary package on Σ: outward unit normal, induced metric, second
fundamental form, mean curvature.  All derivatives of the metric use the
grid's one-sided-at-boundary stencils directly on g (never on derived
fields), so every quantity is uniformly second-order accurate.

Sign conventions: R = g^{ij} R_ij with R_ij the usual curvature of the
Levi-Civita connection; h_ij = -<nu, D_i e_j> with nu the outward unit
normal, which gives the unit circle H = 1/r and the unit sphere R = 2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (MetricField, SymTensorField, matrices_to_stack,
                     sym_components)
from .mesh import DomainGrid, NodeRole


@dataclass
class CurvatureData:
    grid: DomainGrid
    g: np.ndarray        # (N, d, d)
    ginv: np.ndarray     # (N, d, d)
    dg: np.ndarray       # (d, N, d, d)   partial_a g_ij
    d2g: np.ndarray      # (d, d, N, d, d) partial_a partial_b g_ij
    gamma: np.ndarray    # (N, d, d, d)   Gamma^k_ij -> [n, k, i, j]
    dgamma: np.ndarray   # (d, N, d, d, d) partial_a Gamma^k_ij
    ric: np.ndarray      # (N, d, d)
    scal: np.ndarray     # (N,)
    sqrt_det: np.ndarray  # (N,)
    # boundary package, indexed along grid.sigma_idx
    nu: np.ndarray       # (nS, d) outward unit normal, contravariant
    ghat: np.ndarray     # (nS, d-1, d-1) induced metric
    ghat_inv: np.ndarray
    sqrt_det_ghat: np.ndarray  # (nS,)
    hform: np.ndarray    # (nS, d-1, d-1) second fundamental form
    mean_curv: np.ndarray  # (nS,)

    def check_trace_identity(self) -> float:
        """Max deviation of R - g^{ij}R_ij as stored (should be ~0)."""
        r = np.einsum("nij,nij->n", self.ginv, self.ric)
        return float(np.max(np.abs(r - self.scal)))


def curvature(grid: DomainGrid, metric: MetricField) -> CurvatureData:
    """All curvature quantities of the metric; raises on non-SPD nodes."""
    metric.require_spd()
    d = grid.dim
    ops = grid.stencils
    g = metric.as_matrices()
    ginv = np.linalg.inv(g)
    n = grid.n_nodes

    dg = np.empty((d, n, d, d))
    for a in range(d):
        da = ops.d1(a)
        for i in range(d):
            for j in range(i, d):
                v = da @ g[:, i, j]
                dg[a, :, i, j] = v
                dg[a, :, j, i] = v

    d2g = np.empty((d, d, n, d, d))
    for a in range(d):
        for b in range(a, d):
            dab = ops.d2(a, b)
            for i in range(d):
                for j in range(i, d):
                    v = dab @ g[:, i, j]
                    d2g[a, b, :, i, j] = v
                    d2g[a, b, :, j, i] = v
            if b != a:
                d2g[b, a] = d2g[a, b]

    # Gamma^k_ij = 1/2 g^{kl} T_{lij},  T_{lij} = d_i g_{jl} + d_j g_{il} - d_l g_{ij}
    t = np.empty((n, d, d, d))  # [n, l, i, j]
    for l in range(d):
        for i in range(d):
            for j in range(d):
                t[:, l, i, j] = dg[i, :, j, l] + dg[j, :, i, l] - dg[l, :, i, j]
    gamma = 0.5 * np.einsum("nkl,nlij->nkij", ginv, t)

    # dginv_a = -ginv dg_a ginv
    dginv = np.empty_like(dg)
    for a in range(d):
        dginv[a] = -np.einsum("nik,nkl,nlj->nij", ginv, dg[a], ginv)

    dgamma = np.empty((d, n, d, d, d))
    for a in range(d):
        dt = np.empty((n, d, d, d))
        for l in range(d):
            for i in range(d):
                for j in range(d):
                    dt[:, l, i, j] = (d2g[a, i, :, j, l] + d2g[a, j, :, i, l]
                                      - d2g[a, l, :, i, j])
        dgamma[a] = 0.5 * (np.einsum("nkl,nlij->nkij", dginv[a], t)
                           + np.einsum("nkl,nlij->nkij", ginv, dt))

    # Ric_ij = d_k Gamma^k_ji - d_j Gamma^k_ki + G^k_km G^m_ji - G^k_jm G^m_ki
    ric = np.zeros((n, d, d))
    for i in range(d):
        for j in range(d):
            term = np.zeros(n)
            for k in range(d):
                term += dgamma[k][:, k, j, i] - dgamma[j][:, k, k, i]
            for k in range(d):
                for m in range(d):
                    term += (gamma[:, k, k, m] * gamma[:, m, j, i]
                             - gamma[:, k, j, m] * gamma[:, m, k, i])
            ric[:, i, j] = term
    ric = 0.5 * (ric + ric.transpose(0, 2, 1))  # symmetric up to roundoff

    scal = np.einsum("nij,nij->n", ginv, ric)
    sqrt_det = np.sqrt(np.linalg.det(g))

    # boundary package on Σ
    na = grid.sigma_axis
    sgn = grid.normal_sign()
    tang = list(grid.tangential_axes)
    sidx = grid.sigma_idx
    gb = g[sidx]
    ginvb = ginv[sidx]
    nrm = np.sqrt(ginvb[:, na, na])
    nu = sgn * ginvb[:, :, na] / nrm[:, None]
    ghat = gb[np.ix_(np.arange(len(sidx)), tang, tang)]
    ghat_inv = np.linalg.inv(ghat)
    sqrt_det_ghat = np.sqrt(np.linalg.det(ghat))
    # h_ij = -nu_alpha Gamma^alpha_ij ; nu_alpha = sgn * delta_alpha^na / sqrt(ginv^nana)
    hform = np.empty((len(sidx), d - 1, d - 1))
    gam_b = gamma[sidx]
    for p, i in enumerate(tang):
        for q, j in enumerate(tang):
            hform[:, p, q] = -sgn * gam_b[:, na, i, j] / nrm
    mean_curv = np.einsum("npq,npq->n", ghat_inv, hform)

    return CurvatureData(grid=grid, g=g, ginv=ginv, dg=dg, d2g=d2g, gamma=gamma,
                         dgamma=dgamma, ric=ric, scal=scal, sqrt_det=sqrt_det,
                         nu=nu, ghat=ghat, ghat_inv=ghat_inv,
                         sqrt_det_ghat=sqrt_det_ghat, hform=hform,
                         mean_curv=mean_curv)


def flat_metric(grid: DomainGrid) -> MetricField:
    s = len(sym_components(grid.dim))
    vals = np.zeros((s, grid.n_nodes))
    for c, (i, j) in enumerate(sym_components(grid.dim)):
        if i == j:
            vals[c] = 1.0
    return MetricField(grid, vals, provenance="base")


def conformal_metric(grid: DomainGrid, w: np.ndarray) -> MetricField:
    factor = np.exp(2.0 * np.asarray(w, dtype=float))
    flat = flat_metric(grid)
    return MetricField(grid, flat.values * factor[None, :], provenance="base")


def conformal_bump_metric(grid: DomainGrid, amplitude: float = 0.05,
                          center=None, width: float = 0.25) -> MetricField:
    """Default generic base metric: e^{2w} delta with a Gaussian conformal bump."""
    if center is None:
        center = np.full(grid.dim, 0.5) * np.asarray(grid.extents)
        center[grid.sigma_axis] = (0.4 * grid.extents[grid.sigma_axis]
                                   if grid.sigma_side == 0 else
                                   0.6 * grid.extents[grid.sigma_axis])
    r2 = np.sum((grid.coords - np.asarray(center)[None, :]) ** 2, axis=1)
    w = amplitude * np.exp(-r2 / (2.0 * width * width))
    return conformal_metric(grid, w)


def round_sphere_patch_metric(grid: DomainGrid, center=None) -> MetricField:
    """Stereographic chart of the unit round sphere (dim 2): R = 2.

    Default center sits on the Σ face, which makes Σ the image of a meridian
    great circle, hence geodesic (H = 0).
    """
    if grid.dim != 2:
        raise ValueError("round sphere patch is a dim-2 configuration")
    if center is None:
        center = np.array([0.5 * grid.extents[0], 0.0])
        if grid.sigma_axis == 0:
            center = np.array([0.0, 0.5 * grid.extents[1]])
        if grid.sigma_side == 1:
            center[grid.sigma_axis] = grid.extents[grid.sigma_axis]
    r2 = np.sum((grid.coords - np.asarray(center)[None, :]) ** 2, axis=1)
    factor = 4.0 / (1.0 + r2) ** 2
    flat = flat_metric(grid)
    return MetricField(grid, flat.values * factor[None, :], provenance="base")


def scalar_and_mean_curvature(grid: DomainGrid, metric: MetricField):
    """Convenience: (R on all nodes, H on Σ nodes)."""
    data = curvature(grid, metric)
    return data.scal, data.mean_curv
