"""Structured model domain: a rectangle (dim 2) or box (dim 3).

One closed face of the box is the deformation patch Σ (minus its rim), the
rest of the boundary is Σ′, and the rim of the Σ face is the codimension-2
interface Γ.  Nodes are classified into those four roles, trapezoidal
quadrature weights are attached for volume and Σ-surface integrals, and the
finite-difference operator cache lives on the grid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .stencils import GridOperators


class NodeRole(IntEnum):
    INTERIOR = 0
    SIGMA = 1
    SIGMA_PRIME = 2
    GAMMA = 3


class ConfigurationError(ValueError):
    """Invalid domain/weight/run configuration."""


_FACE_NAMES = {0: ("x_min", "x_max"), 1: ("y_min", "y_max"), 2: ("z_min", "z_max")}


def parse_face(spec: str, dim: int) -> tuple[int, int]:
    """Parse a face name like ``'y_min'`` into (axis, side); side 0=min, 1=max."""
    for axis in range(dim):
        for side in (0, 1):
            if spec == _FACE_NAMES[axis][side]:
                return axis, side
    valid = [f for ax in range(dim) for f in _FACE_NAMES[ax]]
    raise ConfigurationError(f"unknown sigma face {spec!r}; expected one of {valid}")


@dataclass
class StencilSet:
    """Difference operators attached to a grid.

    ``ops.d1(axis)``/``ops.d2(a,b)`` are the second-order global operators
    (centered inside, shifted one-sided within reach of each boundary);
    ``ops.dk(axis, k)`` gives the k-th order line stencils for k = 3, 4.

    Ghost policy on Σ: no fictitious values are ever created.  Free operators
    are one-sided at every boundary; the solver builds constraint-aware rows
    at Σ that eliminate the normal-derivative degree of freedom algebraically
    (see ``solver.vertical_constraint_rows``).
    """

    ops: GridOperators

    def d1(self, axis: int):
        return self.ops.d1(axis)

    def d2(self, a: int, b: int):
        return self.ops.d2(a, b)

    def dk(self, axis: int, order: int):
        return self.ops.dk(axis, order)


@dataclass
class DomainGrid:
    dim: int
    extents: tuple[float, ...]
    resolution: tuple[int, ...]
    spacing: tuple[float, ...]
    sigma_axis: int
    sigma_side: int
    shape: tuple[int, ...]
    coords: np.ndarray          # (n_nodes, dim)
    roles: np.ndarray           # (n_nodes,) NodeRole values
    vol_weight: np.ndarray      # (n_nodes,) trapezoidal volume weights
    surf_weight: np.ndarray     # (n_nodes,) Σ-face trapezoid weights, 0 elsewhere
    stencils: StencilSet = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def h(self) -> float:
        return max(self.spacing)

    def nodes_with_role(self, role: NodeRole) -> np.ndarray:
        return np.flatnonzero(self.roles == role)

    @property
    def interior_idx(self) -> np.ndarray:
        return self.nodes_with_role(NodeRole.INTERIOR)

    @property
    def sigma_idx(self) -> np.ndarray:
        return self.nodes_with_role(NodeRole.SIGMA)

    @property
    def sigma_prime_idx(self) -> np.ndarray:
        return self.nodes_with_role(NodeRole.SIGMA_PRIME)

    @property
    def gamma_idx(self) -> np.ndarray:
        return self.nodes_with_role(NodeRole.GAMMA)

    @property
    def tangential_axes(self) -> tuple[int, ...]:
        return tuple(a for a in range(self.dim) if a != self.sigma_axis)

    def axis_index(self, axis: int) -> np.ndarray:
        """Per-node integer index along one axis."""
        idx = np.unravel_index(np.arange(self.n_nodes), self.shape)
        return idx[axis]

    def sigma_face_coordinate(self) -> float:
        return 0.0 if self.sigma_side == 0 else self.extents[self.sigma_axis]

    def normal_sign(self) -> float:
        """Sign of the outward coordinate direction on the Σ face."""
        return -1.0 if self.sigma_side == 0 else 1.0


def build_grid(dim: int,
               extents: tuple[float, ...] | float = 1.0,
               resolution: tuple[int, ...] | int = 33,
               sigma_spec: str | None = None) -> DomainGrid:
    """Build the classified structured grid.

    ``sigma_spec`` selects the boundary face that carries Σ (default: the
    minimal face of the last axis, i.e. ``y_min`` in 2-D and ``z_min`` in 3-D,
    the model domain sitting in the upper half-space).
    """
    if dim not in (2, 3):
        raise ConfigurationError(f"dim must be 2 or 3, got {dim}")
    if np.isscalar(extents):
        extents = (float(extents),) * dim
    extents = tuple(float(e) for e in extents)
    if np.isscalar(resolution):
        resolution = (int(resolution),) * dim
    resolution = tuple(int(r) for r in resolution)
    if len(extents) != dim or len(resolution) != dim:
        raise ConfigurationError("extents/resolution must have one entry per axis")
    if min(resolution) < 9:
        raise ConfigurationError(f"resolution >= 9 per axis required, got {resolution}")
    if min(extents) <= 0:
        raise ConfigurationError(f"extents must be positive, got {extents}")
    if sigma_spec is None:
        sigma_spec = _FACE_NAMES[dim - 1][0]
    sigma_axis, sigma_side = parse_face(sigma_spec, dim)

    spacing = tuple(extents[a] / (resolution[a] - 1) for a in range(dim))
    axes = [np.linspace(0.0, extents[a], resolution[a]) for a in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    coords = np.stack([m.ravel() for m in mesh], axis=1)
    shape = tuple(resolution)
    n = coords.shape[0]

    idx = np.unravel_index(np.arange(n), shape)
    on_boundary = np.zeros(n, dtype=bool)
    for a in range(dim):
        on_boundary |= (idx[a] == 0) | (idx[a] == shape[a] - 1)

    face_val = 0 if sigma_side == 0 else shape[sigma_axis] - 1
    on_face = idx[sigma_axis] == face_val
    on_rim = np.zeros(n, dtype=bool)
    for a in range(dim):
        if a == sigma_axis:
            continue
        on_rim |= on_face & ((idx[a] == 0) | (idx[a] == shape[a] - 1))

    roles = np.full(n, NodeRole.INTERIOR, dtype=np.int8)
    roles[on_boundary] = NodeRole.SIGMA_PRIME
    roles[on_face & ~on_rim] = NodeRole.SIGMA
    roles[on_rim] = NodeRole.GAMMA

    def trapezoid_1d(m: int, h: float) -> np.ndarray:
        w = np.full(m, h)
        w[0] = w[-1] = h / 2
        return w

    vol = np.ones(n)
    for a in range(dim):
        vol *= trapezoid_1d(shape[a], spacing[a])[idx[a]]

    surf = np.zeros(n)
    face_mask = on_face
    w_face = np.ones(n)
    for a in range(dim):
        if a == sigma_axis:
            continue
        w_face *= trapezoid_1d(shape[a], spacing[a])[idx[a]]
    surf[face_mask] = w_face[face_mask]

    ops = GridOperators(shape, spacing)
    return DomainGrid(dim=dim, extents=extents, resolution=resolution, spacing=spacing,
                      sigma_axis=sigma_axis, sigma_side=sigma_side, shape=shape,
                      coords=coords, roles=roles, vol_weight=vol, surf_weight=surf,
                      stencils=StencilSet(ops))


def sigma_prime_face_distances(grid: DomainGrid) -> list[np.ndarray]:
    """Per-node Euclidean distance to each Σ′ face plane (affine, exact)."""
    out = []
    for a in range(grid.dim):
        for side in (0, 1):
            if a == grid.sigma_axis and side == grid.sigma_side:
                continue  # that face is Σ, not Σ′
            x = grid.coords[:, a]
            out.append(x.copy() if side == 0 else grid.extents[a] - x)
    return out


def euclidean_distance_to_sigma_prime(grid: DomainGrid) -> np.ndarray:
    """Exact pointwise distance to Σ′ in model coordinates."""
    return np.min(np.stack(sigma_prime_face_distances(grid), axis=0), axis=0)
