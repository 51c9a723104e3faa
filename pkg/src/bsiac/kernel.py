"""SIAC convolution kernels built from shifted central B-splines."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from .bspline import bspline_eval, bspline_moment, gauss_legendre


@dataclass(frozen=True)
class SiacKernelSpec:
    """Kernel ``K(x) = sum_g c_g B^(order)(x - x_g)`` on unit scale.

    ``num_splines`` is ``r + 1``; the shifts ``x_g = -r/2 + g`` are
    symmetric about zero.
    """

    num_splines: int
    order: int
    shifts: tuple
    coefficients: tuple

    @property
    def r(self) -> int:
        return self.num_splines - 1

    @property
    def half_width(self) -> float:
        """Half-width of the support at unit scale, ``(r + order)/2``."""
        return 0.5 * (self.r + self.order)

    def knots(self) -> np.ndarray:
        """Breakpoints of the piecewise-polynomial kernel at unit scale."""
        return -self.half_width + np.arange(self.r + self.order + 1, dtype=float)

    def moment_matrix(self) -> np.ndarray:
        r = self.r
        return np.array(
            [[bspline_moment(self.order, s, m) for s in self.shifts] for m in range(r + 1)]
        )

    def moment_residual(self) -> np.ndarray:
        """Per-moment residual ``M c - e_0``."""
        e0 = np.zeros(self.num_splines)
        e0[0] = 1.0
        return self.moment_matrix() @ np.asarray(self.coefficients) - e0

    def label(self) -> str:
        return f"K({self.num_splines},{self.order})"


@dataclass(frozen=True)
class ScaledKernel:
    spec: SiacKernelSpec
    scaling: float

    def __post_init__(self):
        if not self.scaling > 0:
            raise ValueError(f"kernel scaling must be positive, got {self.scaling!r}")

    @property
    def support(self) -> tuple:
        w = self.spec.half_width * self.scaling
        return (-w, w)

    def __call__(self, x):
        return kernel_eval(self, x)


def build_kernel(r: int, order: int) -> SiacKernelSpec:
    """Solve the consistency and moment conditions for ``r + 1`` B-splines.

    The coefficients satisfy ``int K(x) x**m dx = delta_{m0}`` for
    ``m = 0..r``.
    """
    if int(r) != r or r < 0:
        raise ValueError(f"r must be a nonnegative integer, got {r!r}")
    if int(order) != order or order < 1:
        raise ValueError(f"B-spline order must be a positive integer, got {order!r}")
    r, order = int(r), int(order)
    shifts = tuple(-0.5 * r + g for g in range(r + 1))
    mat = np.array([[bspline_moment(order, s, m) for s in shifts] for m in range(r + 1)])
    rhs = np.zeros(r + 1)
    rhs[0] = 1.0
    coef = scipy.linalg.solve(mat, rhs)
    resid = np.max(np.abs(mat @ coef - rhs))
    if not resid <= 1e-8:
        raise RuntimeError(f"moment system for r={r}, order={order} solved with residual {resid:.3e}")
    # exact symmetry is guaranteed analytically; remove rounding asymmetry
    coef = 0.5 * (coef + coef[::-1])
    return SiacKernelSpec(r + 1, order, shifts, tuple(float(c) for c in coef))


def kernel_eval(kernel: ScaledKernel, x):
    """Evaluate ``(1/H) sum_g c_g B((x - H x_g)/H)``; zero off the support."""
    spec, h = kernel.spec, kernel.scaling
    if not h > 0:
        raise ValueError(f"kernel scaling must be positive, got {h!r}")
    xs = np.asarray(x, dtype=float) / h
    out = np.zeros_like(xs)
    for c, s in zip(spec.coefficients, spec.shifts):
        out = out + c * bspline_eval(spec.order, xs - s)
    out = out / h
    if out.ndim == 0:
        return float(out)
    return out


def filter_function(
    kernel: ScaledKernel,
    u: Callable,
    x: float,
    quad_points_per_piece: int = 8,
) -> float:
    """Reference filter ``int K_H(x - y) u(y) dy`` by composite Gauss-Legendre.

    Each polynomial piece of the translated kernel gets its own rule, so the
    result is exact whenever ``u`` is a polynomial of degree below
    ``2 * quad_points_per_piece - order + 1``. ``u`` must accept arrays
    of any shape.
    """
    nodes, weights = gauss_legendre(int(quad_points_per_piece))
    h = kernel.scaling
    # kernel breakpoints in y, taken in increasing order
    ys = np.sort(x - h * kernel.spec.knots())
    half = 0.5 * np.diff(ys)
    y = (0.5 * (ys[1:] + ys[:-1]))[:, None] + half[:, None] * nodes[None, :]
    vals = kernel_eval(kernel, x - y) * np.asarray(u(y), dtype=float)
    return float(np.sum(half * (vals @ weights)))


def default_quad_points(order: int, degree: int) -> int:
    """Gauss points per piece exact for degree ``order - 1 + degree``."""
    return max(1, math.ceil((order + degree) / 2))
