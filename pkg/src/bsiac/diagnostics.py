"""Chain diagnostics and posterior summaries."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

MPSRF_FULL_DIM = 200
MPSRF_PROJECTED_DIM = 50


def _autocorr(x: np.ndarray) -> np.ndarray:
    """Autocorrelation of each column via zero-padded FFT."""
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    size = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(xc, n=size, axis=0)
    acov = np.fft.irfft(spec * np.conj(spec), n=size, axis=0)[:n] / n
    var = acov[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        return acov / var


def _ess_1d(rho: np.ndarray, n: int) -> float:
    if not np.isfinite(rho[0]):
        return float(n)  # constant chain
    # Geyer's initial positive sequence on pair sums rho_{2m} + rho_{2m+1}
    npairs = n // 2
    pairs = rho[: 2 * npairs].reshape(npairs, 2).sum(axis=1)
    stop = np.argmax(pairs <= 0) if np.any(pairs <= 0) else npairs
    tau = -1.0 + 2.0 * pairs[:stop].sum()
    # antithetic chains give tau < 1; clamp so ESS never exceeds the draw count
    tau = max(tau, 1.0)
    return float(max(1.0, n / tau))


def ess(chain) -> float:
    """Mean effective sample size over the columns of a ``(J, d)`` chain.

    ``J / tau`` per coordinate with the integrated autocorrelation time
    ``tau = 1 + 2 sum rho_t`` truncated by the initial positive sequence
    rule and clamped to ``tau >= 1``, so each coordinate contributes at most
    ``J``. A constant coordinate counts as ``J``.
    """
    x = np.asarray(chain, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 10:
        raise ValueError(f"ESS needs at least 10 draws, got {n}")
    rho = _autocorr(x)
    return float(np.mean([_ess_1d(rho[:, j], n) for j in range(x.shape[1])]))


def multichain_ess(chains) -> float:
    """Sum of per-chain mean ESS over a list of ``(J, d)`` chains."""
    return float(sum(ess(c) for c in chains))


def mpsrf(chains, project_seed: int = 0) -> float:
    """Brooks-Gelman multivariate potential scale reduction factor.

    ``(n - 1)/n + (m + 1)/m * lambda_max(W^{-1} B/n)`` with ``W`` the mean
    within-chain covariance and ``B/n`` the covariance of the chain means.
    Above 200 dimensions the statistic is computed on a fixed random subset
    of 50 coordinates.
    """
    xs = [np.asarray(c, dtype=float) for c in chains]
    xs = [x[:, None] if x.ndim == 1 else x for x in xs]
    m = len(xs)
    if m < 2:
        raise ValueError("MPSRF needs at least two chains")
    n, d = xs[0].shape
    if any(x.shape != (n, d) for x in xs):
        raise ValueError("all chains must share the same shape")
    if n < 2:
        raise ValueError("MPSRF needs at least two draws per chain")
    if d > MPSRF_FULL_DIM:
        cols = np.sort(np.random.default_rng(project_seed).choice(d, MPSRF_PROJECTED_DIM, replace=False))
        xs = [x[:, cols] for x in xs]
        d = MPSRF_PROJECTED_DIM
    W = sum(np.atleast_2d(np.cov(x, rowvar=False)) for x in xs) / m
    means = np.array([x.mean(axis=0) for x in xs])
    B_n = np.atleast_2d(np.cov(means, rowvar=False))
    try:
        np.linalg.cholesky(W)
    except np.linalg.LinAlgError:
        tr = np.trace(W)
        eps = 1e-12 * tr / d if tr > 0 else 1e-12
        warnings.warn("within-chain covariance is singular; regularizing", RuntimeWarning, stacklevel=2)
        W = W + eps * np.eye(d)
    lam = scipy.linalg.eigh(B_n, W, eigvals_only=True)[-1]
    return float((n - 1) / n + (m + 1) / m * lam)


def quantile_band(samples, level: float = 0.9):
    """Pointwise equal-tailed band from ``(J, N)`` samples.

    Quantiles at ``(1 - level)/2`` and ``(1 + level)/2`` with linear
    interpolation between order statistics.
    """
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level!r}")
    x = np.asarray(samples, dtype=float)
    lo, hi = np.quantile(x, [(1 - level) / 2, (1 + level) / 2], axis=0)
    return lo, hi


def rel_l2_error(estimate, truth) -> float:
    estimate = np.asarray(estimate, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if estimate.shape != truth.shape:
        raise ValueError(f"shape mismatch {estimate.shape} vs {truth.shape}")
    nt = np.linalg.norm(truth)
    if nt == 0:
        raise ValueError("relative error undefined for a zero truth vector")
    return float(np.linalg.norm(estimate - truth) / nt)


@dataclass
class ChainSummary:
    posterior_mean: np.ndarray
    lower_band: np.ndarray
    upper_band: np.ndarray
    mean_ess: float
    mpsrf: float


def summarize_chains(kept_u, level: float = 0.9) -> ChainSummary:
    """Summaries from post-burn-in draws shaped ``(chains, J, N)``."""
    kept_u = np.asarray(kept_u, dtype=float)
    pooled = kept_u.reshape(-1, kept_u.shape[-1])
    lo, hi = quantile_band(pooled, level)
    psrf = mpsrf(list(kept_u)) if kept_u.shape[0] > 1 else float("nan")
    return ChainSummary(pooled.mean(axis=0), lo, hi, multichain_ess(list(kept_u)), psrf)
