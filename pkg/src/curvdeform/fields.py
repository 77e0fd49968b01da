"""Nodal field containers: scalars, boundary scalars, metrics, symmetric 2-tensors.

Symmetric tensors are stored component-stacked: ``values`` has shape
``(n_components, n_nodes)`` where the components enumerate the upper triangle
of the dim×dim matrix in row-major order (2-D: xx, xy, yy).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import DomainGrid, NodeRole


def sym_components(dim: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(dim) for j in range(i, dim)]


def sym_index(dim: int) -> dict[tuple[int, int], int]:
    comps = sym_components(dim)
    out = {}
    for c, (i, j) in enumerate(comps):
        out[(i, j)] = c
        out[(j, i)] = c
    return out


def sym_multiplicity(dim: int) -> np.ndarray:
    """Each off-diagonal component stands for two matrix entries."""
    return np.array([1.0 if i == j else 2.0 for (i, j) in sym_components(dim)])


def stack_to_matrices(values: np.ndarray, dim: int) -> np.ndarray:
    """(S, N) component stack -> (N, dim, dim) symmetric matrices."""
    n = values.shape[1]
    m = np.empty((n, dim, dim))
    for c, (i, j) in enumerate(sym_components(dim)):
        m[:, i, j] = values[c]
        m[:, j, i] = values[c]
    return m


def matrices_to_stack(m: np.ndarray) -> np.ndarray:
    dim = m.shape[-1]
    return np.stack([m[:, i, j] for (i, j) in sym_components(dim)], axis=0)


@dataclass
class ScalarField:
    grid: DomainGrid
    values: np.ndarray  # (n_nodes,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError("scalar field shape mismatch")


@dataclass
class BoundaryScalarField:
    """Values on Σ nodes only (indexed by grid.sigma_idx order)."""
    grid: DomainGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.grid.sigma_idx),):
            raise ValueError("boundary field shape mismatch")

    def padded(self) -> np.ndarray:
        """Full nodal array, zero off Σ (Γ carries 0 by the decay design)."""
        out = np.zeros(self.grid.n_nodes)
        out[self.grid.sigma_idx] = self.values
        return out


def default_support_mask(grid: DomainGrid) -> np.ndarray:
    """Nodes where a deformation tensor may be nonzero: everything but Σ′ and Γ."""
    return (grid.roles != NodeRole.SIGMA_PRIME) & (grid.roles != NodeRole.GAMMA)


@dataclass
class SymTensorField:
    """Symmetric 2-tensor field.

    Deformation tensors carry a support mask that must exclude Σ′ and Γ
    (values are zeroed outside it).  Operator images (e.g. the adjoint
    applied to a potential) are unmasked: pass ``mask=False``.
    """
    grid: DomainGrid
    values: np.ndarray                 # (S, n_nodes)
    mask: np.ndarray | None | bool = field(default=None)  # bool (n_nodes,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        s = len(sym_components(self.grid.dim))
        if self.values.shape != (s, self.grid.n_nodes):
            raise ValueError("tensor field shape mismatch")
        if self.mask is False:
            self.mask = None
            return
        if self.mask is None:
            self.mask = default_support_mask(self.grid)
        bad = self.mask & ((self.grid.roles == NodeRole.SIGMA_PRIME)
                           | (self.grid.roles == NodeRole.GAMMA))
        if bad.any():
            raise ValueError("support mask must exclude Σ′ and Γ nodes")
        self.values = self.values * self.mask[None, :]

    def as_matrices(self) -> np.ndarray:
        return stack_to_matrices(self.values, self.grid.dim)


@dataclass
class MetricField:
    grid: DomainGrid
    values: np.ndarray                 # (S, n_nodes)
    provenance: str = "base"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        s = len(sym_components(self.grid.dim))
        if self.values.shape != (s, self.grid.n_nodes):
            raise ValueError("metric field shape mismatch")

    def as_matrices(self) -> np.ndarray:
        return stack_to_matrices(self.values, self.grid.dim)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.as_matrices()).min())

    def is_spd(self, tol: float = 0.0) -> bool:
        return self.min_eigenvalue() > tol

    def require_spd(self) -> None:
        w = np.linalg.eigvalsh(self.as_matrices())
        worst = int(np.argmin(w[:, 0]))
        if w[worst, 0] <= 0:
            raise DegenerateMetricError(
                f"metric not positive-definite at node {worst}, "
                f"x={tuple(np.round(self.grid.coords[worst], 6))}, "
                f"min eigenvalue {w[worst, 0]:.3e}")

    def perturbed(self, a: SymTensorField, t: float = 1.0,
                  provenance: str = "iterate") -> "MetricField":
        return MetricField(self.grid, self.values + t * a.values, provenance)


class DegenerateMetricError(ValueError):
    """Metric lost positive-definiteness at some node."""
