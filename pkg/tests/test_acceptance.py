"""Acceptance criteria, one test per criterion.

Each test prints ``criterion N: PASS|FAIL`` with the measured quantities
before asserting, and the lines are repeated in the pytest terminal
summary. Run ``python tests/test_acceptance.py`` to see them directly.
"""

import json
import sys
import time
from pathlib import Path

import numpy as np
import pytest
import sympy as sp
from scipy import stats

from bsiac import (BayesSiacModel, BcdOptions, GibbsOptions, ScaledKernel, bcd_map, build_filter_matrix,
                   build_kernel, build_mesh, filter_function, make_dataset, rel_l2_error, run_gibbs)
from bsiac.config import resolve_config
from bsiac.experiments import dg_case, run_experiment
from bsiac.gibbs import sample_alpha_conditional, sample_beta_conditional
from bsiac.map_bcd import update_alpha, update_beta
from bsiac.mesh import Layout
from bsiac.datasets import denoising_signal
from bsiac.diagnostics import multichain_ess, mpsrf, quantile_band
from bsiac.solvers import dense_precision

sys.path.insert(0, str(Path(__file__).parent))
from conftest import denoise_model, observed_rates, random_small_model, record  # noqa: E402

REFERENCE_MAP_ERROR = 4.8e-2


def report(n, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    record(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.2f}s < {budget:g}s]")
    return ok


def test_criterion_01_kernel_moments_and_reproduction():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst_resid, worst_repro = 0.0, 0.0
    for r in (0, 2, 4, 6):
        for ell in (1, 2, 3, 4):
            spec = build_kernel(r, ell)
            worst_resid = max(worst_resid, float(np.max(np.abs(spec.moment_residual()))))
            K = ScaledKernel(spec, 0.1)
            xs = rng.uniform(-1, 1, 20)
            for m in range(r + 1):
                got = np.array([filter_function(K, lambda y: y**m, x) for x in xs])
                worst_repro = max(worst_repro, float(np.max(np.abs(got - xs**m))))
    elapsed = time.perf_counter() - t0
    ok = worst_resid <= 1e-10 and worst_repro <= 1e-9
    assert report(1, ok, f"max moment residual {worst_resid:.2e} (<=1e-10), max reproduction error "
                         f"{worst_repro:.2e} (<=1e-9)", elapsed, 1.0)


def test_criterion_02_kernel_coefficient_oracle():
    # exact rational oracle first
    x = sp.symbols("x")
    hat = sp.Piecewise((1 + x, (x >= -1) & (x <= 0)), (1 - x, (x > 0) & (x <= 1)), (0, True))
    M = sp.Matrix(3, 3, lambda m, g: sp.integrate(hat.subs(x, x - (g - 1)) * x**m, (x, -3, 3)))
    target = [float(v) for v in M.LUsolve(sp.Matrix([1, 0, 0]))]
    t0 = time.perf_counter()
    coef = build_kernel(2, 2).coefficients
    elapsed = time.perf_counter() - t0
    err = float(np.max(np.abs(np.array(coef) - target)))
    ok = err <= 1e-12 and np.allclose(target, [-1 / 12, 7 / 6, -1 / 12], atol=0)
    assert report(2, ok, f"c = {tuple(round(c, 15) for c in coef)}, max |c - exact| {err:.1e} (<=1e-12)",
                  elapsed, 1.0)


def test_criterion_03_filter_convergence():
    t0 = time.perf_counter()
    cells = [16, 32, 64, 128]
    rates = {}
    for k in (1, 2):
        errs = []
        for J in cells:
            mesh = build_mesh(0.0, 1.0, J, k, Layout.GAUSS_LEGENDRE)
            F = build_filter_matrix(mesh, build_kernel(2 * k, k + 1))
            u = denoising_signal(np.array(mesh.nodes))
            errs.append(mesh.nodal_l2(u - F.matvec(u)))
        rates[k] = observed_rates(cells, errs)
    elapsed = time.perf_counter() - t0
    ok = all(np.min(rates[k]) >= 2 * k + 0.5 for k in (1, 2))
    detail = "; ".join(f"k={k} orders {np.round(rates[k], 2).tolist()} (>= {2 * k + 0.5})" for k in (1, 2))
    assert report(3, ok, detail, elapsed, 10.0)


def test_criterion_04_denoising_point_estimate(denoise_setup):
    t0 = time.perf_counter()
    map_err, filt_err = [], []
    for seed in range(10):
        model, ds = denoise_model(denoise_setup, seed)
        res = bcd_map(model, BcdOptions(u0=np.zeros(model.N)))
        map_err.append(rel_l2_error(res.u, ds.truth))
        filt_err.append(rel_l2_error(denoise_setup[1].matvec(ds.data), ds.truth))
    elapsed = time.perf_counter() - t0
    med_map, med_filt = float(np.median(map_err)), float(np.median(filt_err))
    ok = 0.5 * REFERENCE_MAP_ERROR <= med_map <= 2 * REFERENCE_MAP_ERROR and med_map < med_filt
    assert report(4, ok, f"median MAP error {med_map:.4f} in [{0.5 * REFERENCE_MAP_ERROR}, {2 * REFERENCE_MAP_ERROR}], "
                         f"median F*b error {med_filt:.4f} (MAP < F*b)", elapsed, 30.0)


def test_criterion_05_bcd_monotonicity():
    t0 = time.perf_counter()
    worst_increase, worst_fixed = -np.inf, 0.0
    for seed in range(20):
        model = random_small_model(np.random.default_rng(500 + seed))
        assert model.N <= 50
        res = bcd_map(model, BcdOptions(rel_tol=1e-10, abs_tol=1e-14))
        h = np.array(res.energy_history)
        worst_increase = max(worst_increase, float(np.max(np.diff(h) / np.abs(h[:-1]))))
        worst_fixed = max(worst_fixed, abs(res.alpha / update_alpha(model, res.u) - 1),
                          abs(res.beta / update_beta(model, res.u) - 1))
    elapsed = time.perf_counter() - t0
    ok = worst_increase <= 1e-9 and worst_fixed <= 1e-8
    assert report(5, ok, f"max relative energy increase {worst_increase:.1e} (<=1e-9), "
                         f"max alpha/beta fixed-point mismatch {worst_fixed:.1e} (<=1e-8)", elapsed, 10.0)


def test_criterion_06_gibbs_conditionals():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    model = random_small_model(rng)
    u = rng.standard_normal(model.N)
    draw_rng = np.random.default_rng(78)
    n = 100_000
    alphas = np.array([sample_alpha_conditional(model, u, draw_rng) for _ in range(n)])
    betas = np.array([sample_beta_conditional(model, u, draw_rng) for _ in range(n)])
    ra, rb = model.data_residual(u), model.prior_residual(u)
    rate_a = 0.5 * ra @ ra + model.priors.d_alpha
    rate_b = 0.5 * rb @ rb + model.priors.d_beta
    p_a = stats.kstest(alphas, stats.gamma(model.alpha_shape, scale=1 / rate_a).cdf).pvalue
    p_b = stats.kstest(betas, stats.gamma(model.beta_shape, scale=1 / rate_b).cdf).pvalue

    from bsiac import DenseOperator
    mesh = build_mesh(0, 1, 6, 0)
    F = build_filter_matrix(mesh, build_kernel(2, 2))
    grng = np.random.default_rng(42)
    small = BayesSiacModel(DenseOperator(grng.standard_normal((8, 6)) / 2), grng.standard_normal(8), F)
    a, b = 3.0, 2.0
    samples = run_gibbs(small, GibbsOptions(samples=n, chains=1, burn_in_fraction=0.0, seed=79, fixed_hyper=(a, b)))
    draws = samples.u[0]
    cov = np.linalg.inv(dense_precision(small, a, b))
    mean = cov @ (a * small.data_rhs())
    z_mean = np.max(np.abs(draws.mean(axis=0) - mean) / np.sqrt(np.diag(cov) / n))
    se_cov = np.sqrt((np.outer(np.diag(cov), np.diag(cov)) + cov**2) / n)
    z_cov = np.max(np.abs(np.cov(draws, rowvar=False) - cov) / se_cov)
    elapsed = time.perf_counter() - t0
    ok = p_a > 1e-3 and p_b > 1e-3 and z_mean <= 5 and z_cov <= 5
    assert report(6, ok, f"KS p(alpha) {p_a:.3f}, p(beta) {p_b:.3f} (>1e-3); u-draw mean max z {z_mean:.2f}, "
                         f"cov max z {z_cov:.2f} (<=5)", elapsed, 60.0)


@pytest.fixture(scope="module")
def denoise_chains(denoise_setup):
    model, ds = denoise_model(denoise_setup, 0)
    t0 = time.perf_counter()
    samples = run_gibbs(model, GibbsOptions(samples=10_000, chains=4, seed=0))
    return samples, ds, time.perf_counter() - t0


def test_criterion_07_gibbs_diagnostics(denoise_chains):
    samples, ds, sampling_time = denoise_chains
    t0 = time.perf_counter()
    kept = np.ascontiguousarray(samples.kept_u())
    psrf = mpsrf(list(kept))
    total_ess = multichain_ess(list(kept))
    elapsed = sampling_time + time.perf_counter() - t0
    ok = psrf - 1 <= 1e-1 and total_ess >= 1e3
    assert report(7, ok, f"MPSRF - 1 = {psrf - 1:.2e} (<=1e-1), mean ESS {total_ess:.0f} (>=1e3)", elapsed, 300.0)


def test_criterion_08_posterior_band(denoise_chains):
    samples, ds, _ = denoise_chains
    t0 = time.perf_counter()
    lo, hi = quantile_band(samples.pooled_u(), 0.9)
    coverage = float(np.mean((ds.truth >= lo) & (ds.truth <= hi)))
    elapsed = time.perf_counter() - t0
    assert report(8, coverage >= 0.75, f"90% band covers truth at {coverage:.0%} of nodes (>=75%)", elapsed, 300.0)


def test_criterion_09_dg_rates():
    t0 = time.perf_counter()
    cfg = resolve_config("dg-convergence")
    cells = [16, 32, 64, 128]
    ok, parts = True, []
    for k in (1, 2):
        rows = [dg_case(cfg, J, k) for J in cells]
        dg = np.array([r["dgError"] for r in rows])
        siac = np.array([r["siacError"] for r in rows])
        bayes = np.array([r["bayesError"] for r in rows])
        r_dg, r_siac, r_bayes = (observed_rates(cells, e) for e in (dg, siac, bayes))
        ok_k = (np.all((r_dg >= k + 0.8) & (r_dg <= k + 1.3)) and np.min(r_siac) >= 2 * k + 0.5
                and np.all(bayes <= dg) and np.max(r_bayes) < 2 * k + 0.5)
        ok = ok and ok_k
        parts.append(f"k={k}: DG {np.round(r_dg, 2).tolist()} in [{k + 0.8}, {k + 1.3}], "
                     f"SIAC {np.round(r_siac, 2).tolist()} >= {2 * k + 0.5}, "
                     f"MAP {np.round(r_bayes, 2).tolist()} < {2 * k + 0.5} with error <= DG at all J: "
                     f"{bool(np.all(bayes <= dg))}")
    elapsed = time.perf_counter() - t0
    assert report(9, ok, "; ".join(parts), elapsed, 300.0)


def test_criterion_10_deblurring(tmp_path):
    t0 = time.perf_counter()
    cfg = resolve_config("deblur", {"out": str(tmp_path)})
    m = run_experiment(cfg).metrics
    elapsed = time.perf_counter() - t0
    ok = m["relErrorMap"] < m["relErrorBlurred"] and m["relErrorFiltered"] >= 0.9 * m["relErrorBlurred"]
    assert report(10, ok, f"n=64: blurred error {m['relErrorBlurred']:.4g}, filtered {m['relErrorFiltered']:.4g} "
                          f"(>= 0.9x blurred), MAP {m['relErrorMap']:.4g} (< blurred)", elapsed, 120.0)


def test_criterion_11_determinism(tmp_path):
    t0 = time.perf_counter()
    runs = {
        "denoise": {"samples": 1000},
        "deblur": {"image_size": 32},
        "dg-convergence": {"cells_list": "16,32", "degrees": "1,2"},
        "kernel-info": {"r": 4, "ell": 3},
    }
    mismatched, compared = [], 0
    for experiment, overrides in runs.items():
        first = tmp_path / experiment / "first"
        run_experiment(resolve_config(experiment, overrides | {"out": str(first)}))
        manifest = json.loads((first / "manifest.json").read_text())
        second = tmp_path / experiment / "second"
        run_experiment(resolve_config(experiment, manifest["config"] | {"out": str(second)}))
        for f in sorted(first.iterdir()):
            if f.suffix in (".csv", ".pgm"):
                compared += 1
                if f.read_bytes() != (second / f.name).read_bytes():
                    mismatched.append(f"{experiment}/{f.name}")
    elapsed = time.perf_counter() - t0
    assert report(11, not mismatched and compared > 0,
                  f"{compared} CSV/PGM files compared across reruns, mismatches: {mismatched or 'none'}",
                  elapsed, 120.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
