"""Central univariate B-splines on unit-spaced knots.

The order-``l`` central B-spline is the ``l``-fold self-convolution of the
indicator of ``[-1/2, 1/2)``. It is a piecewise polynomial of degree
``l - 1`` with breakpoints ``-l/2, -l/2 + 1, ..., l/2``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def gauss_legendre(npts: int):
    """Cached read-only Gauss-Legendre nodes and weights on ``[-1, 1]``."""
    nodes, weights = np.polynomial.legendre.leggauss(int(npts))
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _check_order(order: int) -> int:
    if int(order) != order or order < 1:
        raise ValueError(f"B-spline order must be a positive integer, got {order!r}")
    return int(order)


def bspline_knots(order: int) -> np.ndarray:
    """Breakpoints ``-order/2 + i`` for ``i = 0..order``."""
    order = _check_order(order)
    return -0.5 * order + np.arange(order + 1, dtype=float)


def bspline_eval(order: int, x):
    """Evaluate the central B-spline of the given order at ``x``.

    Uses the Cox-de Boor recursion on the uniform knot sequence, so every
    value is an exact polynomial evaluation on its knot interval. Accepts
    scalars or arrays; returns the same shape.
    """
    order = _check_order(order)
    xs = np.asarray(x, dtype=float)
    t = bspline_knots(order)
    # order-1 pieces are half-open intervals [t_i, t_{i+1})
    basis = [((xs >= t[i]) & (xs < t[i + 1])).astype(float) for i in range(order)]
    for p in range(2, order + 1):
        basis = [
            ((xs - t[i]) * basis[i] + (t[i + p] - xs) * basis[i + 1]) / (p - 1)
            for i in range(order - p + 1)
        ]
    out = basis[0]
    if out.ndim == 0:
        return float(out)
    return out


def bspline_moment(order: int, shift: float, m: int) -> float:
    """Exact moment ``int B(x - shift) x**m dx``.

    Gauss-Legendre on every knot interval with ``ceil((order + m)/2)``
    points, which integrates the degree ``order - 1 + m`` pieces exactly.
    """
    order = _check_order(order)
    if int(m) != m or m < 0:
        raise ValueError(f"moment index must be a nonnegative integer, got {m!r}")
    npts = max(1, math.ceil((order + m) / 2))
    nodes, weights = gauss_legendre(npts)
    t = bspline_knots(order)
    total = 0.0
    for lo, hi in zip(t[:-1], t[1:]):
        half = 0.5 * (hi - lo)
        xi = 0.5 * (hi + lo) + half * nodes
        total += half * np.dot(weights, bspline_eval(order, xi) * (xi + shift) ** m)
    return float(total)
