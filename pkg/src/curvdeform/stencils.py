"""Finite-difference stencils on uniform 1-D node lines and their tensor lifts.

All derivative operators are second-order accurate: centered in the interior,
shifted (one-sided) where the centered window would leave the line.  Weights
come from Fornberg's recurrence, so each stencil is exact on polynomials up to
its window size minus one by construction.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def fd_weights(z: float, nodes: np.ndarray, order: int) -> np.ndarray:
    """Fornberg weights for the ``order``-th derivative at ``z`` on ``nodes``."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if order >= n:
        raise ValueError("need at least order+1 nodes")
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - z
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - z
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            for k in range(mn, 0, -1):
                c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
            c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = ((nodes[i] - z) * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = (nodes[i] - z) * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _window(i: int, n: int, width: int) -> np.ndarray:
    """Index window of ``width`` nodes around ``i``, clipped into [0, n)."""
    lo = i - (width - 1) // 2
    lo = max(0, min(lo, n - width))
    return np.arange(lo, lo + width)


def derivative_matrix_1d(n: int, h: float, order: int) -> sp.csr_matrix:
    """Second-order accurate ``order``-th derivative on n uniform nodes.

    Centered windows of minimal size in the interior (parity gives the even
    orders their extra degree of exactness); windows of ``order + 2`` nodes
    shifted inward near the ends.
    """
    if n < order + 2:
        raise ValueError(f"need at least {order + 2} nodes for D{order}")
    centered = order + 1 if order % 2 == 0 else order + 2
    boundary = order + 2
    rows, cols, vals = [], [], []
    for i in range(n):
        half = (centered - 1) // 2
        if half <= i <= n - 1 - half:
            idx = _window(i, n, centered)
        else:
            idx = _window(i, n, boundary)
        w = fd_weights(i * h, idx * h, order)
        rows.extend([i] * len(idx))
        cols.extend(idx)
        vals.extend(w)
    m = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    m.eliminate_zeros()
    return m


def kron_lift(mats_1d: list[sp.spmatrix]) -> sp.csr_matrix:
    """Kronecker product of per-axis operators, C-order (axis 0 slowest)."""
    out = mats_1d[0]
    for m in mats_1d[1:]:
        out = sp.kron(out, m, format="csr")
    return out.tocsr()


class GridOperators:
    """Cache of lifted derivative matrices for one structured grid.

    ``d1(axis)`` and ``d2(a, b)`` are global sparse operators on flattened
    nodal arrays; mixed second derivatives are products of the two first
    derivative lifts (Kronecker factors on distinct axes, so the product is
    the exact tensor-product stencil).  ``dk(axis, order)`` exposes the
    third/fourth-order line stencils used by diagnostics.
    """

    def __init__(self, shape: tuple[int, ...], spacing: tuple[float, ...]):
        self.shape = tuple(shape)
        self.spacing = tuple(spacing)
        self.dim = len(shape)
        self._line: dict[tuple[int, int], sp.csr_matrix] = {}
        self._lifted: dict[tuple, sp.csr_matrix] = {}

    def line(self, axis: int, order: int) -> sp.csr_matrix:
        key = (axis, order)
        if key not in self._line:
            self._line[key] = derivative_matrix_1d(self.shape[axis], self.spacing[axis], order)
        return self._line[key]

    def _lift(self, per_axis: dict[int, sp.spmatrix], key: tuple) -> sp.csr_matrix:
        if key not in self._lifted:
            mats = []
            for ax in range(self.dim):
                mats.append(per_axis.get(ax, sp.identity(self.shape[ax], format="csr")))
            self._lifted[key] = kron_lift(mats)
        return self._lifted[key]

    def d1(self, axis: int) -> sp.csr_matrix:
        return self._lift({axis: self.line(axis, 1)}, ("d1", axis))

    def d2(self, a: int, b: int) -> sp.csr_matrix:
        a, b = min(a, b), max(a, b)
        if a == b:
            return self._lift({a: self.line(a, 2)}, ("d2", a))
        return self._lift({a: self.line(a, 1), b: self.line(b, 1)}, ("d2", a, b))

    def dk(self, axis: int, order: int) -> sp.csr_matrix:
        return self._lift({axis: self.line(axis, order)}, ("dk", axis, order))
