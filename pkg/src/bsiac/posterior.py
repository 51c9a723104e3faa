"""Hierarchical Bayesian SIAC model.

Likelihood ``b | u, alpha ~ N(A u, alpha^{-1} I)``, prior
``(F - I) u | beta ~ N(0, beta^{-1} I)`` and gamma hyper-priors on the
precisions ``alpha`` and ``beta`` (shape ``c``, rate ``d``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg

from .operators import LinearOperator

DENSE_LIMIT = 2000


class ModelError(ValueError):
    """Model violates a well-posedness requirement."""


@dataclass(frozen=True)
class HyperPriors:
    c_alpha: float = 1.0
    d_alpha: float = 1e-3
    c_beta: float = 1.0
    d_beta: float = 1e-3

    def __post_init__(self):
        for name in ("c_alpha", "d_alpha", "c_beta", "d_beta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")


class BayesSiacModel:
    """Linear data model paired with the SIAC prior.

    ``A`` and ``F`` are operators with ``matvec``/``rmatvec``; dense Gram
    matrices are built lazily and cached, so the model must not be mutated.
    """

    def __init__(self, A: LinearOperator, b, F: LinearOperator, priors: HyperPriors | None = None,
                 check: bool = True):
        self.A = A
        self.b = np.asarray(b, dtype=float)
        self.F = F
        self.priors = priors if priors is not None else HyperPriors()
        M, N = A.shape
        if self.b.shape != (M,):
            raise ValueError(f"data length {self.b.shape} does not match operator rows {M}")
        if F.shape != (N, N):
            raise ValueError(f"filter shape {F.shape} does not match {N} unknowns")
        self.M, self.N = M, N
        if self.alpha_shape - 1 <= 0 or self.beta_shape - 1 <= 0:
            raise ModelError("need M/2 + c_alpha - 1 > 0 and N/2 + c_beta - 1 > 0")
        self._cache = {}
        if check and not check_common_kernel(self):
            raise ModelError("common kernel condition fails: ker(A) and ker(F - I) intersect")

    @property
    def alpha_shape(self) -> float:
        """Shape of the alpha full conditional, ``M/2 + c_alpha``."""
        return self.M / 2 + self.priors.c_alpha

    @property
    def beta_shape(self) -> float:
        return self.N / 2 + self.priors.c_beta

    def prior_residual(self, u) -> np.ndarray:
        """``(F - I) u``."""
        return self.F.matvec(u) - u

    def prior_residual_t(self, w) -> np.ndarray:
        """``(F - I)^T w``."""
        return self.F.rmatvec(w) - w

    def data_residual(self, u) -> np.ndarray:
        return self.A.matvec(u) - self.b

    def precision_apply(self, alpha: float, beta: float, v) -> np.ndarray:
        """``C v`` with ``C = alpha A^T A + beta (F - I)^T (F - I)``."""
        return alpha * self.A.rmatvec(self.A.matvec(v)) + beta * self.prior_residual_t(self.prior_residual(v))

    def data_gram(self) -> np.ndarray:
        if "AtA" not in self._cache:
            self._cache["AtA"] = self.A.gram()
        return self._cache["AtA"]

    def prior_gram(self) -> np.ndarray:
        if "GtG" not in self._cache:
            g = self.F.toarray() - np.eye(self.N)
            self._cache["GtG"] = g.T @ g
        return self._cache["GtG"]

    def data_rhs(self) -> np.ndarray:
        """``A^T b``."""
        if "Atb" not in self._cache:
            self._cache["Atb"] = self.A.rmatvec(self.b)
        return self._cache["Atb"]


def gibbs_energy(model: BayesSiacModel, u, alpha: float, beta: float) -> float:
    """Negative log posterior up to an additive constant."""
    if not alpha > 0 or not beta > 0:
        raise ValueError(f"precisions must be positive, got alpha={alpha!r}, beta={beta!r}")
    p = model.priors
    r1 = model.data_residual(u)
    r2 = model.prior_residual(u)
    return float(
        0.5 * alpha * np.dot(r1, r1)
        + 0.5 * beta * np.dot(r2, r2)
        + p.d_alpha * alpha
        + p.d_beta * beta
        - (model.alpha_shape - 1) * np.log(alpha)
        - (model.beta_shape - 1) * np.log(beta)
    )


def energy_gradient_u(model: BayesSiacModel, u, alpha: float, beta: float) -> np.ndarray:
    """Gradient of the Gibbs energy with respect to ``u``."""
    return alpha * model.A.rmatvec(model.data_residual(u)) + beta * model.prior_residual_t(model.prior_residual(u))


def _spectral_norm_estimate(op, n: int, iters: int = 50) -> float:
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = op.rmatvec(op.matvec(v))
        est = np.linalg.norm(w)
        if est == 0:
            return 0.0
        v = w / est
    return float(np.sqrt(est))


def check_common_kernel(model: BayesSiacModel, tol: float = 1e-10) -> bool:
    """True iff ``A^T A + (F - I)^T (F - I)`` is positive definite.

    The smallest eigenvalue must exceed ``tol`` times the largest. Small
    models are checked by a dense eigensolve. Large ones first try the
    certificate ``lambda_min(C) >= lambda_min(A^T A)``, which is cheap for
    identity and Kronecker operators, and fall back to an iterative
    eigensolver.
    """
    N = model.N
    if N <= DENSE_LIMIT:
        ev = np.linalg.eigvalsh(model.data_gram() + model.prior_gram())
        return bool(ev[0] > tol * max(ev[-1], np.finfo(float).tiny))
    lo_a, hi_a = model.A.gram_eigen_bounds()
    g_norm = _spectral_norm_estimate(model.F, N) + 1.0
    upper = hi_a + 1.1 * g_norm**2
    if lo_a is not None and lo_a > tol * upper:
        return True
    op = scipy.sparse.linalg.LinearOperator(
        (N, N), matvec=lambda v: model.precision_apply(1.0, 1.0, np.ravel(v)), dtype=float
    )
    lam = scipy.sparse.linalg.eigsh(op, k=1, which="SA", return_eigenvectors=False)[0]
    return bool(lam > tol * upper)
