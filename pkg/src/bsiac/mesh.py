"""Uniform periodic meshes carrying piecewise-polynomial nodal data."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np


class Layout(str, enum.Enum):
    GAUSS_LEGENDRE = "gauss-legendre"
    EQUIDISTANT = "equidistant"


def reference_nodes(degree: int, layout: Layout) -> np.ndarray:
    """Local node positions on the unit cell ``[0, 1]``."""
    npts = degree + 1
    if Layout(layout) is Layout.GAUSS_LEGENDRE:
        xi, _ = np.polynomial.legendre.leggauss(npts)
        return 0.5 * (xi + 1.0)
    return (np.arange(1, npts + 1) - 0.5) / npts


def reference_weights(degree: int, layout: Layout) -> np.ndarray:
    """Quadrature weights on the unit cell matching :func:`reference_nodes`.

    Gauss-Legendre weights for that layout, otherwise the midpoint-type
    rule with equal weights.
    """
    npts = degree + 1
    if Layout(layout) is Layout.GAUSS_LEGENDRE:
        _, w = np.polynomial.legendre.leggauss(npts)
        return 0.5 * w
    return np.full(npts, 1.0 / npts)


def lagrange_basis(nodes: np.ndarray, x) -> np.ndarray:
    """Values of the Lagrange cardinal polynomials on ``nodes`` at ``x``.

    Returns an array of shape ``(len(x), len(nodes))``.
    """
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.ones((x.size, nodes.size))
    for p in range(nodes.size):
        for q in range(nodes.size):
            if q != p:
                out[:, p] *= (x - nodes[q]) / (nodes[p] - nodes[q])
    return out


@dataclass(frozen=True)
class UniformPeriodicMesh:
    a: float
    b: float
    cells: int
    degree: int
    layout: Layout
    nodes: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.cells * (self.degree + 1)

    @property
    def cell_width(self) -> float:
        return (self.b - self.a) / self.cells

    @property
    def length(self) -> float:
        return self.b - self.a

    def ref_nodes(self) -> np.ndarray:
        return reference_nodes(self.degree, self.layout)

    def quad_weights(self) -> np.ndarray:
        """Global nodal quadrature weights (sum to the domain length)."""
        w = reference_weights(self.degree, self.layout) * self.cell_width
        return np.tile(w, self.cells)

    def nodal_l2(self, values) -> float:
        """Discrete L2 norm of nodal values using the layout's quadrature."""
        v = np.asarray(values, dtype=float)
        return float(np.sqrt(np.dot(self.quad_weights(), v * v)))


def build_mesh(a: float, b: float, cells: int, degree: int, layout=Layout.EQUIDISTANT) -> UniformPeriodicMesh:
    """Place ``degree + 1`` nodes in each of ``cells`` uniform cells on ``[a, b]``."""
    if not b > a:
        raise ValueError(f"need b > a, got [{a}, {b}]")
    if int(cells) != cells or cells < 1:
        raise ValueError(f"cell count must be a positive integer, got {cells!r}")
    if int(degree) != degree or degree < 0:
        raise ValueError(f"degree must be a nonnegative integer, got {degree!r}")
    layout = Layout(layout)
    h = (b - a) / cells
    ref = reference_nodes(degree, layout)
    nodes = (a + h * (np.arange(cells)[:, None] + ref[None, :])).ravel()
    nodes.setflags(write=False)
    return UniformPeriodicMesh(float(a), float(b), int(cells), int(degree), layout, nodes)
