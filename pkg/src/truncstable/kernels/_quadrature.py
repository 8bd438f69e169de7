"""Shared fixed-order quadrature building blocks.

Cached Gauss--Legendre rules on [0, 1] and composite variants with caller
supplied breakpoints (used to cluster nodes near integrable kinks and steep
layers).  All rules use open interior nodes, so integrands with removable or
integrable endpoint singularities are never evaluated at the endpoint itself.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights transplanted to [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def composite_01(breaks: tuple[float, ...], n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite n-point Gauss rule on [0, 1] with the given panel breakpoints.

    ``breaks`` must start at 0, end at 1, and be strictly increasing.
    """
    base_x, base_w = gauss_01(n)
    nodes = []
    weights = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        width = hi - lo
        nodes.append(lo + width * base_x)
        weights.append(width * base_w)
    xs = np.concatenate(nodes)
    ws = np.concatenate(weights)
    xs.setflags(write=False)
    ws.setflags(write=False)
    return xs, ws


@lru_cache(maxsize=None)
def gauss_interval(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on the fixed interval [lo, hi]."""
    base_x, base_w = gauss_01(n)
    nodes = lo + (hi - lo) * base_x
    weights = (hi - lo) * base_w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights
