"""Composite Gauss-Legendre rules on geometric panels, vectorized over rows."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def geometric_edges(lo, hi, count: int) -> np.ndarray:
    """Panel edges lo = e_0 < ... < e_count = hi, geometric, one row per lo/hi pair."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    frac = np.linspace(0.0, 1.0, count + 1)
    edges = lo[:, None] * (hi / lo)[:, None] ** frac[None, :]
    edges[:, 0] = lo
    edges[:, -1] = hi
    return edges


def panel_nodes(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an n-point rule on every panel of every row.

    ``edges`` has shape (rows, panels + 1); returns two (rows, panels * n) arrays.
    """
    edges = np.atleast_2d(edges)
    t, w = gauss_legendre(n)
    a = edges[:, :-1, None]
    b = edges[:, 1:, None]
    half = 0.5 * (b - a)
    nodes = half * t + 0.5 * (a + b)
    weights = half * w
    shape = (edges.shape[0], (edges.shape[1] - 1) * n)
    return nodes.reshape(shape), weights.reshape(shape)


def gregory_coefficients(order: int) -> list[float]:
    """Gregory endpoint coefficients 1/12, 1/24, 19/720, ... (first ``order``)."""
    # integrals of binomial(s, k+1) over [0, 1], tabulated
    table = [1 / 12, 1 / 24, 19 / 720, 3 / 160, 863 / 60480, 275 / 24192, 33953 / 3628800, 8183 / 1036800]
    if order > len(table):
        raise ValueError(f"at most {len(table)} Gregory corrections are tabulated")
    return table[:order]
