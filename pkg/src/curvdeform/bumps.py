"""Smooth profile functions and seeded smooth test fields."""
from __future__ import annotations

import numpy as np

from .fields import SymTensorField, sym_components
from .mesh import DomainGrid


def mollifier(t: np.ndarray) -> np.ndarray:
    """C-infinity bump: exp(1 - 1/(1-t^2)) for |t| < 1, zero outside; value 1 at 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
    return out


def smooth_step_quintic(t: np.ndarray) -> np.ndarray:
    """Quintic smoothstep: 0 for t<=0, 1 for t>=1, C^2 monotone in between."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t * t)


def radial_bump(grid: DomainGrid, center, width: float, amplitude: float = 1.0) -> np.ndarray:
    r = np.linalg.norm(grid.coords - np.asarray(center)[None, :], axis=1)
    return amplitude * mollifier(r / width)


def poly_bump(t: np.ndarray, power: int = 4) -> np.ndarray:
    """(1-t^2)^power inside |t|<1, zero outside; tame high derivatives."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    out[inside] = (1.0 - t[inside] ** 2) ** power
    return out


def radial_poly_bump(grid: DomainGrid, center, width: float,
                     amplitude: float = 1.0, power: int = 4) -> np.ndarray:
    r = np.linalg.norm(grid.coords - np.asarray(center)[None, :], axis=1)
    return amplitude * poly_bump(r / width, power)


def random_smooth_scalar(grid: DomainGrid, rng: np.random.Generator,
                         kmax: int = 2, scale: float = 1.0) -> np.ndarray:
    """Low-frequency random trig field; smooth with O(1) derivatives."""
    out = np.zeros(grid.n_nodes)
    for _ in range(3):
        k = rng.integers(0, kmax + 1, size=grid.dim)
        phase = rng.uniform(0, 2 * np.pi, size=grid.dim)
        amp = rng.uniform(-1.0, 1.0)
        term = np.full(grid.n_nodes, amp)
        for a in range(grid.dim):
            term = term * np.cos(np.pi * k[a] * grid.coords[:, a] / grid.extents[a] + phase[a])
        out += term
    return scale * out


def random_smooth_tensor(grid: DomainGrid, rng: np.random.Generator,
                         center=None, width: float = 0.3,
                         scale: float = 1.0, touch_sigma: bool = True) -> SymTensorField:
    """Seeded smooth symmetric tensor supported in a polynomial bump ball.

    By default the ball is centered on the Σ face (the field is nonzero on Σ
    but compactly supported away from Σ′ and Γ).
    """
    if center is None:
        center = np.full(grid.dim, 0.5) * np.asarray(grid.extents)
        face = grid.sigma_face_coordinate()
        center[grid.sigma_axis] = face if touch_sigma else \
            face + 0.35 * grid.extents[grid.sigma_axis] * (1 if grid.sigma_side == 0 else -1)
    envelope = radial_poly_bump(grid, center, width)
    s = len(sym_components(grid.dim))
    vals = np.stack([random_smooth_scalar(grid, rng) * envelope for _ in range(s)], axis=0)
    mask = envelope > 0
    from .fields import default_support_mask
    return SymTensorField(grid, scale * vals, mask=mask & default_support_mask(grid))
