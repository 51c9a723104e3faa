"""Solves with the SPD precision ``C = alpha A^T A + beta (F - I)^T (F - I)``."""

from __future__ import annotations

import enum

import numpy as np
import scipy.linalg

from .posterior import DENSE_LIMIT, BayesSiacModel


class Solver(str, enum.Enum):
    AUTO = "auto"
    DIRECT = "direct"
    CG = "cg"


class SolverError(RuntimeError):
    """Factorization failure or CG stagnation."""


def resolve_solver(solver, n: int) -> Solver:
    solver = Solver(solver)
    if solver is Solver.AUTO:
        return Solver.DIRECT if n <= DENSE_LIMIT else Solver.CG
    return solver


def conjugate_gradient(apply, rhs, x0=None, rtol: float = 1e-10, maxiter: int | None = None):
    """Plain CG for an SPD operator; stops on ``||r|| <= rtol ||rhs||``."""
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    maxiter = 10 * n if maxiter is None else maxiter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0:
        return np.zeros(n)
    r = rhs - apply(x)
    p = r.copy()
    rr = np.dot(r, r)
    target = (rtol * bnorm) ** 2
    for _ in range(maxiter):
        if rr <= target:
            return x
        q = apply(p)
        pq = np.dot(p, q)
        if pq <= 0:
            raise SolverError(f"CG hit non-positive curvature {pq:.3e}; operator not SPD")
        step = rr / pq
        x += step * p
        r -= step * q
        rr_new = np.dot(r, r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    if rr <= target:
        return x
    raise SolverError(
        f"CG did not converge in {maxiter} iterations: relative residual {np.sqrt(rr) / bnorm:.3e}"
    )


def dense_precision(model: BayesSiacModel, alpha: float, beta: float) -> np.ndarray:
    return alpha * model.data_gram() + beta * model.prior_gram()


def cholesky(mat: np.ndarray):
    try:
        return scipy.linalg.cho_factor(mat, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Cholesky factorization failed: {exc}") from exc


def solve_precision(model: BayesSiacModel, alpha: float, beta: float, rhs, solver=Solver.AUTO,
                    x0=None, cg_tol: float = 1e-10) -> np.ndarray:
    """Solve ``C u = rhs``."""
    solver = resolve_solver(solver, model.N)
    if solver is Solver.DIRECT:
        factor = cholesky(dense_precision(model, alpha, beta))
        return scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    return conjugate_gradient(lambda v: model.precision_apply(alpha, beta, v), rhs, x0=x0, rtol=cg_tol)
