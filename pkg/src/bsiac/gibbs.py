"""Gibbs sampler over the exact full conditionals of the Bayesian SIAC posterior.

One sweep draws ``u`` from its Gaussian conditional, then ``alpha`` and
``beta`` from their gamma conditionals. The Gaussian draw solves
``C u = alpha A^T b + w`` with ``w = sqrt(alpha) A^T v1 + sqrt(beta) (F - I)^T v2``,
which has covariance ``C`` and so never needs a factor of ``C`` itself.

Stored tuples follow the sampler output ``(u_j, alpha_j, beta_j)``:
``alpha_j`` and ``beta_j`` are the values ``u_j`` was drawn with, so
``alpha_1``/``beta_1`` are the initial prior draws and the hyper-parameters
generated from the final ``u_J`` are discarded.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .posterior import BayesSiacModel
from .solvers import Solver, cholesky, dense_precision, resolve_solver, solve_precision


@dataclass(frozen=True)
class GibbsOptions:
    samples: int = 10_000
    chains: int = 4
    burn_in_fraction: float = 0.10
    seed: int = 0
    solver: Solver = Solver.AUTO
    cg_tol: float = 1e-10
    init_mode: str = "prior"
    beta_init_cap: float = 1e6
    fixed_hyper: tuple | None = None
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1 or self.chains < 1:
            raise ValueError("samples and chains must be positive")
        if not 0 <= self.burn_in_fraction < 1:
            raise ValueError("burn-in fraction must lie in [0, 1)")
        if self.init_mode != "prior":
            raise ValueError(f"unknown init mode {self.init_mode!r}")
        object.__setattr__(self, "solver", Solver(self.solver))

    @property
    def burn_in(self) -> int:
        return int(self.burn_in_fraction * self.samples)


@dataclass
class ChainSamples:
    u: np.ndarray        # (chains, samples, N)
    alpha: np.ndarray    # (chains, samples)
    beta: np.ndarray     # (chains, samples)
    burn_in: int
    seed: int
    timings: list | None = None

    @property
    def chains(self) -> int:
        return self.u.shape[0]

    def kept_u(self) -> np.ndarray:
        return self.u[:, self.burn_in:, :]

    def kept_alpha(self) -> np.ndarray:
        return self.alpha[:, self.burn_in:]

    def kept_beta(self) -> np.ndarray:
        return self.beta[:, self.burn_in:]

    def pooled_u(self) -> np.ndarray:
        """Post-burn-in ``u`` draws of all chains stacked, ``(chains * kept, N)``."""
        kept = self.kept_u()
        return kept.reshape(-1, kept.shape[-1])


def chain_rng(seed: int, chain: int) -> np.random.Generator:
    """Independent stream for one chain, keyed by ``(seed, chain)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(chain),)))


def _noise_rhs(model: BayesSiacModel, alpha, beta, rng):
    v1 = rng.standard_normal(model.M)
    v2 = rng.standard_normal(model.N)
    return (alpha * model.data_rhs() + np.sqrt(alpha) * model.A.rmatvec(v1)
            + np.sqrt(beta) * model.prior_residual_t(v2))


def sample_u_conditional(model: BayesSiacModel, alpha: float, beta: float, rng, solver=Solver.AUTO,
                         x0=None, cg_tol: float = 1e-10) -> np.ndarray:
    """One draw from ``N(C^{-1} alpha A^T b, C^{-1})``."""
    rhs = _noise_rhs(model, alpha, beta, rng)
    return solve_precision(model, alpha, beta, rhs, solver=solver, x0=x0, cg_tol=cg_tol)


def sample_alpha_conditional(model: BayesSiacModel, u, rng) -> float:
    """Draw from ``Gamma(M/2 + c_alpha, rate = ||A u - b||^2/2 + d_alpha)``."""
    r = model.data_residual(u)
    rate = 0.5 * np.dot(r, r) + model.priors.d_alpha
    return float(rng.gamma(model.alpha_shape, 1.0 / rate))


def sample_beta_conditional(model: BayesSiacModel, u, rng) -> float:
    """Draw from ``Gamma(N/2 + c_beta, rate = ||(F - I) u||^2/2 + d_beta)``."""
    r = model.prior_residual(u)
    rate = 0.5 * np.dot(r, r) + model.priors.d_beta
    return float(rng.gamma(model.beta_shape, 1.0 / rate))


def _run_chain(model: BayesSiacModel, opts: GibbsOptions, chain: int):
    rng = chain_rng(opts.seed, chain)
    p = model.priors
    n, N = opts.samples, model.N
    us = np.empty((n, N))
    alphas = np.empty(n)
    betas = np.empty(n)
    solver = resolve_solver(opts.solver, N)
    if opts.fixed_hyper is not None:
        alpha, beta = (float(v) for v in opts.fixed_hyper)
    else:
        alpha = float(rng.gamma(p.c_alpha, 1.0 / p.d_alpha))
        beta = min(float(rng.gamma(p.c_beta, 1.0 / p.d_beta)), opts.beta_init_cap)
    fixed_factor = None
    if opts.fixed_hyper is not None and solver is Solver.DIRECT:
        fixed_factor = cholesky(dense_precision(model, alpha, beta))
    u = None
    start = time.perf_counter()
    for j in range(n):
        if fixed_factor is not None:
            u = scipy.linalg.cho_solve(fixed_factor, _noise_rhs(model, alpha, beta, rng), check_finite=False)
        else:
            u = sample_u_conditional(model, alpha, beta, rng, solver=solver, x0=u, cg_tol=opts.cg_tol)
        us[j], alphas[j], betas[j] = u, alpha, beta
        if opts.fixed_hyper is None:
            alpha = sample_alpha_conditional(model, u, rng)
            beta = sample_beta_conditional(model, u, rng)
    return us, alphas, betas, time.perf_counter() - start


def run_gibbs(model: BayesSiacModel, opts: GibbsOptions | None = None) -> ChainSamples:
    """Run independent chains; results do not depend on ``workers``."""
    opts = opts or GibbsOptions()
    model.data_rhs()
    if resolve_solver(opts.solver, model.N) is Solver.DIRECT:
        # fill the shared caches before chains start
        model.data_gram()
        model.prior_gram()
    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            results = list(pool.map(lambda c: _run_chain(model, opts, c), range(opts.chains)))
    else:
        results = [_run_chain(model, opts, c) for c in range(opts.chains)]
    return ChainSamples(
        u=np.stack([r[0] for r in results]),
        alpha=np.stack([r[1] for r in results]),
        beta=np.stack([r[2] for r in results]),
        burn_in=opts.burn_in,
        seed=opts.seed,
        timings=[r[3] for r in results],
    )
