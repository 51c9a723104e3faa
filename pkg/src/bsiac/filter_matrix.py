"""Matrix representation of the SIAC filter on a uniform periodic mesh.

Row ``n`` of ``F`` holds the filtered Lagrange basis functions evaluated at
node ``x_n``, so ``F u`` are the nodal values of the filtered piecewise
polynomial. With uniform cells, identical local nodes and ``H`` equal to
the cell width, every block row is a cyclic shift of the first one, and
the entries do not depend on the cell width at all.
"""

from __future__ import annotations

import math

import numpy as np

from .kernel import ScaledKernel, SiacKernelSpec, kernel_eval
from .mesh import UniformPeriodicMesh, lagrange_basis
from .operators import LinearOperator


class UnsupportedConfiguration(ValueError):
    """Kernel support wraps around the periodic domain more than once."""


def _quad_rule(mesh: UniformPeriodicMesh, spec: SiacKernelSpec):
    npts = math.ceil((mesh.degree + spec.order) / 2) + 1
    return np.polynomial.legendre.leggauss(npts)


def _check_support(mesh: UniformPeriodicMesh, spec: SiacKernelSpec):
    if spec.half_width * mesh.cell_width > 0.5 * mesh.length + 1e-14 * mesh.length:
        raise UnsupportedConfiguration(
            f"{spec.label()} with H={mesh.cell_width:g} has support half-width "
            f"{spec.half_width * mesh.cell_width:g} exceeding half the domain {0.5 * mesh.length:g}"
        )


def _row_entries(xq: float, ref: np.ndarray, spec: SiacKernelSpec, nodes, weights):
    """Integrate ``K_1(xq - s) phi_p(s - d)`` over every cell ``[d, d + 1]``.

    Coordinates are in cell units. Returns ``{d: row of k+1 entries}``.
    """
    unit = ScaledKernel(spec, 1.0)
    lo, hi = xq - spec.half_width, xq + spec.half_width
    kernel_breaks = xq - spec.knots()
    out = {}
    for d in range(math.floor(lo), math.ceil(hi)):
        a, b = max(lo, d), min(hi, d + 1)
        if b <= a:
            continue
        inner = kernel_breaks[(kernel_breaks > a) & (kernel_breaks < b)]
        pts = np.concatenate(([a], np.sort(inner), [b]))
        row = np.zeros(ref.size)
        for s0, s1 in zip(pts[:-1], pts[1:]):
            half = 0.5 * (s1 - s0)
            s = 0.5 * (s0 + s1) + half * nodes
            kv = kernel_eval(unit, xq - s)
            row += half * (lagrange_basis(ref, s - d).T @ (weights * kv))
        out[d] = row
    return out


class FilterMatrix(LinearOperator):
    """Block-circulant ``N x N`` SIAC filter matrix.

    Stores ``blocks[i]``, the ``(k+1) x (k+1)`` block coupling cell ``j`` to
    cell ``j + offsets[i] (mod J)``.
    """

    kind = "filter"

    def __init__(self, mesh: UniformPeriodicMesh, kernel: ScaledKernel, offsets, blocks):
        self.mesh = mesh
        self.kernel = kernel
        self.offsets = np.asarray(offsets, dtype=int)
        self.blocks = np.asarray(blocks, dtype=float)
        self.blocks.setflags(write=False)
        self.shape = (mesh.size, mesh.size)
        self._dense = None

    @property
    def spec(self) -> SiacKernelSpec:
        return self.kernel.spec

    def _grid(self, v):
        v = self._check(v, self.shape[0])
        return v.reshape(self.mesh.cells, self.mesh.degree + 1)

    def matvec(self, v):
        u = self._grid(v)
        out = np.zeros_like(u)
        for d, blk in zip(self.offsets, self.blocks):
            out += np.roll(u, -d, axis=0) @ blk.T
        return out.ravel()

    def rmatvec(self, w):
        z = self._grid(w)
        out = np.zeros_like(z)
        for d, blk in zip(self.offsets, self.blocks):
            out += np.roll(z @ blk, d, axis=0)
        return out.ravel()

    def toarray(self) -> np.ndarray:
        if self._dense is None:
            jc, kp = self.mesh.cells, self.mesh.degree + 1
            dense = np.zeros((jc, kp, jc, kp))
            rows = np.arange(jc)
            for d, blk in zip(self.offsets, self.blocks):
                dense[rows, :, (rows + d) % jc, :] += blk
            self._dense = dense.reshape(jc * kp, jc * kp)
            self._dense.setflags(write=False)
        return self._dense.copy()

    def block(self, i: int, j: int) -> np.ndarray:
        """Block coupling cell ``i`` (rows) to cell ``j`` (columns)."""
        d = (j - i) % self.mesh.cells
        out = np.zeros((self.mesh.degree + 1,) * 2)
        for off, blk in zip(self.offsets, self.blocks):
            if off == d:
                out += blk
        return out


def build_filter_matrix(mesh: UniformPeriodicMesh, spec: SiacKernelSpec) -> FilterMatrix:
    """Assemble the filter matrix with ``H`` equal to the cell width.

    Only the first block row is integrated; the rest follows by cyclic
    shifts. Entries use Gauss-Legendre on every piece of the common
    refinement of kernel breakpoints and cell boundaries, which is exact.
    """
    _check_support(mesh, spec)
    kernel = ScaledKernel(spec, mesh.cell_width)
    ref = mesh.ref_nodes()
    nodes, weights = _quad_rule(mesh, spec)
    jc, kp = mesh.cells, mesh.degree + 1
    acc = {}
    for q in range(kp):
        for d, row in _row_entries(ref[q], ref, spec, nodes, weights).items():
            acc.setdefault(d % jc, np.zeros((kp, kp)))[q] += row
    offsets = sorted(acc)
    return FilterMatrix(mesh, kernel, offsets, [acc[d] for d in offsets])


def assemble_dense_rowwise(mesh: UniformPeriodicMesh, spec: SiacKernelSpec) -> np.ndarray:
    """Integrate every row of ``F`` directly in physical coordinates.

    Slow reference assembly without the circulant shortcut; meant for
    checking :func:`build_filter_matrix` on small meshes.
    """
    _check_support(mesh, spec)
    h = mesh.cell_width
    kernel = ScaledKernel(spec, h)
    ref = mesh.ref_nodes()
    nodes, weights = _quad_rule(mesh, spec)
    jc, kp = mesh.cells, mesh.degree + 1
    dense = np.zeros((mesh.size, mesh.size))
    for n, xn in enumerate(mesh.nodes):
        lo, hi = xn - spec.half_width * h, xn + spec.half_width * h
        kernel_breaks = xn - h * spec.knots()
        first = math.floor((lo - mesh.a) / h)
        last = math.ceil((hi - mesh.a) / h)
        for c in range(first, last):
            c0, c1 = mesh.a + c * h, mesh.a + (c + 1) * h
            a, b = max(lo, c0), min(hi, c1)
            if b <= a:
                continue
            inner = kernel_breaks[(kernel_breaks > a) & (kernel_breaks < b)]
            pts = np.concatenate(([a], np.sort(inner), [b]))
            col = (c % jc) * kp
            for y0, y1 in zip(pts[:-1], pts[1:]):
                half = 0.5 * (y1 - y0)
                y = 0.5 * (y0 + y1) + half * nodes
                kv = kernel_eval(kernel, xn - y)
                dense[n, col:col + kp] += half * (lagrange_basis(ref, (y - c0) / h).T @ (weights * kv))
    return dense


def filter_apply(F: FilterMatrix, u) -> np.ndarray:
    """Nodal values of the filtered function, ``F u``."""
    return F.matvec(u)
