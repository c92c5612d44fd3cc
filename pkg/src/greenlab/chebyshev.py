"""Barycentric interpolation on Chebyshev-Lobatto grids."""

from __future__ import annotations

import numpy as np

__all__ = ["lobatto_nodes", "ChebyshevInterpolant"]


def lobatto_nodes(m: int, lo: float, hi: float) -> np.ndarray:
    """m Chebyshev points of the second kind on [lo, hi], ascending, endpoints included."""
    if m < 2:
        raise ValueError("need at least two nodes")
    k = np.arange(m)
    x = np.cos(np.pi * k / (m - 1))[::-1]  # ascending on [-1, 1]
    return (lo + hi) / 2.0 + (hi - lo) / 2.0 * x


class ChebyshevInterpolant:
    """Barycentric interpolant through values on a Chebyshev-Lobatto grid.

    Exact at the nodes; evaluation is vectorized over numpy arrays. The
    barycentric weights for Lobatto points are (-1)^k with the endpoints
    halved, which keeps the formula stable for any degree.
    """

    def __init__(self, nodes: np.ndarray, values: np.ndarray):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.shape != values.shape or nodes.ndim != 1:
            raise ValueError("nodes and values must be matching 1-D arrays")
        m = nodes.size
        w = np.ones(m)
        w[1::2] = -1.0
        w[0] *= 0.5
        w[-1] *= 0.5
        self.nodes = nodes
        self.values = values
        self._w = w
        self.lo = float(nodes[0])
        self.hi = float(nodes[-1])

    @classmethod
    def from_function(cls, f, m: int, lo: float, hi: float) -> "ChebyshevInterpolant":
        nodes = lobatto_nodes(m, lo, hi)
        return cls(nodes, np.array([f(x) for x in nodes]))

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        scalar = x_arr.ndim == 0
        xf = np.atleast_1d(x_arr).ravel()
        diff = xf[:, None] - self.nodes[None, :]
        exact_row, exact_col = np.nonzero(diff == 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = self._w[None, :] / diff
            out = ratios @ self.values / ratios.sum(axis=1)
        out[exact_row] = self.values[exact_col]
        out = out.reshape(np.atleast_1d(x_arr).shape)
        return float(out[0]) if scalar else out
