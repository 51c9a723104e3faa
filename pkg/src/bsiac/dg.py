"""Nodal DG for ``u_t + u_x = 0`` on a periodic interval.

Degree-``k`` Lagrange polynomials on Gauss-Legendre nodes, full upwind
flux, classical RK4 in time. With Gauss-Legendre nodes the nodal mass
matrix is exactly diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .mesh import Layout, UniformPeriodicMesh, build_mesh, lagrange_basis


class IntegrationError(RuntimeError):
    """Solution blew up (non-finite values)."""


@dataclass
class DgSolution:
    mesh: UniformPeriodicMesh
    values: np.ndarray  # (J, k+1)
    time: float

    @property
    def nodal(self) -> np.ndarray:
        return self.values.ravel()

    def cell_integrals(self) -> np.ndarray:
        w = 0.5 * np.polynomial.legendre.leggauss(self.mesh.degree + 1)[1]
        return self.mesh.cell_width * (self.values @ w)


class _Operators:
    """Reference-element matrices on ``[-1, 1]``."""

    def __init__(self, k: int):
        xi, w = np.polynomial.legendre.leggauss(k + 1)
        V = np.polynomial.legendre.legvander(xi, k)
        Vx = np.zeros_like(V)
        for j in range(k + 1):
            c = np.zeros(k + 1)
            c[j] = 1.0
            Vx[:, j] = np.polynomial.legendre.legval(xi, np.polynomial.legendre.legder(c))
        self.D = Vx @ np.linalg.inv(V)  # D[i, j] = l_j'(xi_i)
        self.w = w
        self.left = lagrange_basis(xi, -1.0)[0]
        self.right = lagrange_basis(xi, 1.0)[0]
        # stiffness S[i, j] = int l_i' l_j = w_j D[j, i]
        self.S = self.D.T * w[None, :]


def dg_rhs(u: np.ndarray, ops: _Operators, h: float) -> np.ndarray:
    """Semi-discrete right-hand side for unit-speed advection."""
    trace_r = u @ ops.right            # u_j at its right edge
    flux_in = np.roll(trace_r, 1)      # upwind state entering from the left
    vol = u @ ops.S.T                  # (S u)_i per cell
    surf = np.outer(trace_r, ops.right) - np.outer(flux_in, ops.left)
    return (2.0 / h) * (vol - surf) / ops.w[None, :]


def dg_solve(J: int, k: int, T: float, cfl: float | None = None, initial: Callable | None = None,
             a: float = 0.0, b: float = 1.0) -> DgSolution:
    """Advance the nodal interpolant of ``initial`` to time ``T``.

    The step is ``cfl * h`` (default ``cfl = 0.05/(2k + 1)``) with the last
    step shortened to land on ``T`` exactly.
    """
    if J < 2:
        raise ValueError("need at least two cells")
    if not 0 <= k <= 6:
        raise ValueError(f"polynomial degree must lie in 0..6, got {k}")
    if not T > 0:
        raise ValueError("final time must be positive")
    cfl = 0.05 / (2 * k + 1) if cfl is None else cfl
    if initial is None:
        raise ValueError("initial condition required")
    mesh = build_mesh(a, b, J, k, Layout.GAUSS_LEGENDRE)
    h = mesh.cell_width
    ops = _Operators(k)
    u = np.asarray(initial(mesh.nodes), dtype=float).reshape(J, k + 1).copy()
    dt = cfl * h
    nsteps = int(np.ceil(T / dt - 1e-12))
    t = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(nsteps):
            dt_s = min(dt, T - t) if step == nsteps - 1 else dt
            k1 = dg_rhs(u, ops, h)
            k2 = dg_rhs(u + 0.5 * dt_s * k1, ops, h)
            k3 = dg_rhs(u + 0.5 * dt_s * k2, ops, h)
            k4 = dg_rhs(u + dt_s * k3, ops, h)
            u = u + dt_s / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += dt_s
            if not np.isfinite(u).all():
                raise IntegrationError(f"non-finite DG solution at t={t:g}")
    return DgSolution(mesh, u, T)


def dg_l2_error(sol: DgSolution, exact: Callable, npts: int | None = None) -> float:
    """L2 error of the piecewise polynomial against ``exact``.

    Gauss-Legendre with ``k + 3`` points per cell by default.
    """
    mesh = sol.mesh
    k = mesh.degree
    npts = k + 3 if npts is None else npts
    xq, wq = np.polynomial.legendre.leggauss(npts)
    sq = 0.5 * (xq + 1.0)
    phi = lagrange_basis(mesh.ref_nodes(), sq)             # (npts, k+1)
    uh = sol.values @ phi.T                                 # (J, npts)
    h = mesh.cell_width
    x = mesh.a + h * (np.arange(mesh.cells)[:, None] + sq[None, :])
    err = uh - np.asarray(exact(x), dtype=float)
    return float(np.sqrt(0.5 * h * np.sum(err * err * wq[None, :])))
