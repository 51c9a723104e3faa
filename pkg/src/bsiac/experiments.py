"""Experiment runners behind the command-line interface.

Each runner takes a resolved :class:`ExperimentConfig`, writes its artifacts
into ``config.out`` and returns a :class:`RunReport`. Metrics are computed
from the same arrays that go into the CSV files, so
:func:`metrics_from_outputs` reproduces them exactly from disk.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .datasets import advection_initial, denoising_signal, make_dataset, synthetic_image
from .dg import dg_l2_error, dg_solve
from .diagnostics import multichain_ess, mpsrf, quantile_band, rel_l2_error
from .filter_matrix import build_filter_matrix
from .gibbs import GibbsOptions, run_gibbs
from .io import InputError, read_csv, read_pgm, write_csv, write_json, write_pgm, write_rows
from .kernel import build_kernel
from .map_bcd import BcdOptions, bcd_map
from .mesh import build_mesh
from .operators import gaussian_blur_1d, identity_operator, kron_separable, unvec, vec
from .posterior import BayesSiacModel, HyperPriors

log = logging.getLogger(__name__)


@dataclass
class RunReport:
    metrics: dict
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)


def _priors(cfg: ExperimentConfig) -> HyperPriors:
    return HyperPriors(cfg.c_alpha, cfg.d_alpha, cfg.c_beta, cfg.d_beta)


def _bcd_options(cfg: ExperimentConfig, n: int) -> BcdOptions:
    u0 = np.zeros(n) if cfg.bcd_init == "zero" else None
    return BcdOptions(max_iterations=cfg.max_iterations, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                      solver=cfg.solver, u0=u0)


def _gibbs_options(cfg: ExperimentConfig) -> GibbsOptions:
    return GibbsOptions(samples=cfg.samples, chains=cfg.chains, burn_in_fraction=cfg.burn_in_fraction,
                        seed=cfg.seed, solver=cfg.solver, workers=cfg.workers)


def _estimators(cfg: ExperimentConfig) -> set:
    if cfg.estimator == "all":
        return {"filter", "map", "gibbs"} if cfg.experiment == "denoise" else {"filter", "map"}
    return {cfg.estimator}


def psnr(estimate, truth, peak: float = 1.0) -> float:
    mse = float(np.mean((np.asarray(estimate) - np.asarray(truth)) ** 2))
    return float("inf") if mse == 0 else float(10.0 * np.log10(peak * peak / mse))


def gibbs_metrics(kept_u, kept_alpha, kept_beta, truth, level: float) -> dict:
    """Chain summaries; inputs are C-contiguous ``(chains, kept, ...)`` arrays."""
    pooled = kept_u.reshape(-1, kept_u.shape[-1])
    mean = pooled.mean(axis=0)
    lo, hi = quantile_band(pooled, level)
    chains = list(kept_u)
    psrf = mpsrf(chains) if len(chains) > 1 else float("nan")
    return {
        "relErrorMean": rel_l2_error(mean, truth),
        "bandCoverage": float(np.mean((truth >= lo) & (truth <= hi))),
        "meanEss": multichain_ess(chains),
        "mpsrf": psrf,
        "mpsrfMinusOne": psrf - 1.0,
        "meanAlpha": float(kept_alpha.mean()),
        "meanBeta": float(kept_beta.mean()),
    }, mean, lo, hi


def _write_chains(out: Path, samples, files: list):
    n = samples.u.shape[2]
    header = ["sampleIndex", "alpha", "beta"] + [f"u{i + 1}" for i in range(n)]
    for c in range(samples.chains):
        path = out / f"chain_{c}.csv"
        idx = np.arange(samples.u.shape[1])
        write_csv(path, header, [idx, samples.alpha[c], samples.beta[c]] + list(samples.u[c].T))
        files.append(path.name)


# -- denoising -----------------------------------------------------------------

def run_denoise(cfg: ExperimentConfig) -> RunReport:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files, timings, metrics = [], {}, {}
    mesh = build_mesh(0.0, 1.0, cfg.cells, cfg.degree, cfg.layout)
    t0 = time.perf_counter()
    F = build_filter_matrix(mesh, build_kernel(cfg.r, cfg.ell))
    timings["filterMatrix"] = time.perf_counter() - t0
    x = np.array(mesh.nodes)
    truth = denoising_signal(x)
    A = identity_operator(mesh.size)
    ds = make_dataset(A, truth, cfg.noise_variance, cfg.seed)
    write_csv(out / "truth.csv", ["x", "value"], [x, truth])
    write_csv(out / "data.csv", ["x", "value"], [x, ds.data])
    files += ["truth.csv", "data.csv"]
    metrics["relErrorData"] = rel_l2_error(ds.data, truth)
    todo = _estimators(cfg)

    if "filter" in todo:
        filtered = F.matvec(ds.data)
        write_csv(out / "filtered.csv", ["x", "value"], [x, filtered])
        files.append("filtered.csv")
        metrics["relErrorFiltered"] = rel_l2_error(filtered, truth)

    if todo & {"map", "gibbs"}:
        model = BayesSiacModel(A, ds.data, F, _priors(cfg))
    if "map" in todo:
        t0 = time.perf_counter()
        res = bcd_map(model, _bcd_options(cfg, mesh.size))
        timings["map"] = time.perf_counter() - t0
        write_csv(out / "map.csv", ["x", "value"], [x, res.u])
        files.append("map.csv")
        metrics.update(relErrorMap=rel_l2_error(res.u, truth), mapAlpha=res.alpha, mapBeta=res.beta,
                       mapIterations=res.iterations, mapConverged=res.converged)
    if "gibbs" in todo:
        opts = _gibbs_options(cfg)
        t0 = time.perf_counter()
        samples = run_gibbs(model, opts)
        timings["gibbs"] = time.perf_counter() - t0
        timings["gibbsPerChain"] = samples.timings
        kept_u = np.ascontiguousarray(samples.kept_u())
        gm, mean, lo, hi = gibbs_metrics(kept_u, samples.kept_alpha(), samples.kept_beta(), truth,
                                         cfg.band_level)
        gm["burnIn"] = samples.burn_in
        metrics.update(gm)
        timings["essPerSecond"] = gm["meanEss"] / timings["gibbs"]
        write_csv(out / "posterior.csv", ["x", "mean", "lower", "upper"], [x, mean, lo, hi])
        files.append("posterior.csv")
        if cfg.write_chains:
            _write_chains(out, samples, files)
    return RunReport(metrics, files, timings)


# -- deblurring ------------------------------------------------------------------

def load_image(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.image is None:
        return synthetic_image(cfg.image_size)
    img = read_pgm(cfg.image)
    if img.shape[0] != img.shape[1]:
        raise InputError(f"{cfg.image}: image must be square, got {img.shape[1]}x{img.shape[0]}")
    if img.shape[0] % (cfg.degree + 1):
        raise ConfigError(f"field 'degree': image side {img.shape[0]} is not divisible by degree + 1")
    return img


def _display(img: np.ndarray) -> np.ndarray:
    """Rescale images whose range exceeds one (blur gain) for PGM output."""
    peak = float(np.max(img))
    return img / peak if peak > 1.0 else img


def run_deblur(cfg: ExperimentConfig) -> RunReport:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    files, timings = [], {}
    img = load_image(cfg)
    n = img.shape[0]
    mesh = build_mesh(0.0, 1.0, n // (cfg.degree + 1), cfg.degree, cfg.layout)
    t0 = time.perf_counter()
    F1 = build_filter_matrix(mesh, build_kernel(cfg.r, cfg.ell))
    F = kron_separable(F1.toarray())
    A = identity_operator(n * n) if cfg.blur == "identity" else kron_separable(gaussian_blur_1d(n, cfg.blur_gamma).matrix)
    timings["operators"] = time.perf_counter() - t0
    truth = vec(img)
    ds = make_dataset(A, truth, cfg.noise_variance, cfg.seed)
    columns = {"index": np.arange(n * n), "truth": truth, "data": ds.data}
    todo = _estimators(cfg)
    if "filter" in todo:
        columns["filtered"] = F.matvec(ds.data)
    if todo & {"map", "gibbs"}:
        model = BayesSiacModel(A, ds.data, F, _priors(cfg))
    meta = {}
    if "map" in todo:
        t0 = time.perf_counter()
        res = bcd_map(model, _bcd_options(cfg, n * n))
        timings["map"] = time.perf_counter() - t0
        columns["map"] = res.u
        meta.update(mapAlpha=res.alpha, mapBeta=res.beta, mapIterations=res.iterations,
                    mapConverged=res.converged)
    if "gibbs" in todo:
        t0 = time.perf_counter()
        samples = run_gibbs(model, _gibbs_options(cfg))
        timings["gibbs"] = time.perf_counter() - t0
        columns["mean"] = samples.pooled_u().mean(axis=0)
    write_csv(out / "images.csv", list(columns), list(columns.values()))
    files.append("images.csv")
    pgm_names = {"truth": "truth.pgm", "data": "blurred.pgm", "filtered": "filtered.pgm", "map": "map.pgm",
                 "mean": "mean.pgm"}
    for key, name in pgm_names.items():
        if key in columns:
            write_pgm(out / name, _display(unvec(columns[key], n, n)))
            files.append(name)
    metrics = deblur_metrics(columns)
    metrics.update(meta, imageSize=n)
    return RunReport(metrics, files, timings)


def deblur_metrics(columns: dict) -> dict:
    truth = columns["truth"]
    names = {"data": "Blurred", "filtered": "Filtered", "map": "Map", "mean": "Mean"}
    m = {}
    for key, label in names.items():
        if key in columns:
            m[f"relError{label}"] = rel_l2_error(columns[key], truth)
            m[f"psnr{label}"] = psnr(columns[key], truth)
    return m


# -- DG convergence ----------------------------------------------------------------

def _periodic_shift(fn, a: float, b: float, shift: float):
    length = b - a
    return lambda x: fn(np.mod(np.asarray(x, dtype=float) - shift - a, length) + a)


def observed_orders(cells, errors) -> list:
    """Successive rates ``log(e_i/e_{i+1}) / log(J_{i+1}/J_i)``; first entry ``None``."""
    rates = [None]
    for i in range(1, len(cells)):
        rates.append(float(np.log(errors[i - 1] / errors[i]) / np.log(cells[i] / cells[i - 1])))
    return rates


def fitted_order(cells, errors) -> float | None:
    """Least-squares slope of ``-log e`` against ``log J``."""
    if len(cells) < 2:
        return None
    return float(-np.polyfit(np.log(cells), np.log(errors), 1)[0])


def dg_case(cfg: ExperimentConfig, J: int, k: int) -> dict:
    sol = dg_solve(J, k, cfg.final_time, cfg.cfl, advection_initial, cfg.domain_a, cfg.domain_b)
    exact = _periodic_shift(advection_initial, cfg.domain_a, cfg.domain_b, cfg.final_time)
    mesh = sol.mesh
    xe = exact(np.array(mesh.nodes))
    r = 2 * k if cfg.r is None else cfg.r
    ell = k + 1 if cfg.ell is None else cfg.ell
    F = build_filter_matrix(mesh, build_kernel(r, ell))
    filtered = F.matvec(sol.nodal)
    model = BayesSiacModel(identity_operator(mesh.size), sol.nodal, F, _priors(cfg))
    res = bcd_map(model, _bcd_options(cfg, mesh.size))
    return {
        "J": J, "k": k,
        "dgError": dg_l2_error(sol, exact),
        "dgNodalError": mesh.nodal_l2(sol.nodal - xe),
        "siacError": mesh.nodal_l2(filtered - xe),
        "bayesError": mesh.nodal_l2(res.u - xe),
    }


ERROR_COLUMNS = ("dgError", "dgNodalError", "siacError", "bayesError")


def dg_table_metrics(rows) -> dict:
    m = {}
    for k in sorted({int(r["k"]) for r in rows}):
        sub = [r for r in rows if int(r["k"]) == k]
        cells = [r["J"] for r in sub]
        for col in ERROR_COLUMNS:
            m[f"k{k}_{col}_order"] = fitted_order(cells, [r[col] for r in sub])
    return m


def run_dg_convergence(cfg: ExperimentConfig) -> RunReport:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cases = [(J, k) for k in cfg.degrees for J in cfg.cells_list]
    t0 = time.perf_counter()
    if cfg.workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(lambda c: dg_case(cfg, *c), cases))
    else:
        rows = [dg_case(cfg, J, k) for J, k in cases]
    elapsed = time.perf_counter() - t0
    table = []
    for k in cfg.degrees:
        sub = [r for r in rows if r["k"] == k]
        cells = [r["J"] for r in sub]
        orders = {c: observed_orders(cells, [r[c] for r in sub]) for c in ERROR_COLUMNS}
        for i, r in enumerate(sub):
            row = [r["J"], r["k"]] + [r[c] for c in ERROR_COLUMNS]
            row += ["" if orders[c][i] is None else orders[c][i] for c in ERROR_COLUMNS]
            table.append(row)
    header = ["J", "k", *ERROR_COLUMNS, *(c.replace("Error", "Order") for c in ERROR_COLUMNS)]
    write_rows(out / "convergence.csv", header, table)
    return RunReport(dg_table_metrics(rows), ["convergence.csv"], {"total": elapsed})


# -- kernel info --------------------------------------------------------------------

KERNEL_INFO_HEADER = ["gamma", "shift", "coefficient", "moment_order", "moment_residual", "support_half_width"]


def kernel_info_rows(r: int, ell: int) -> list:
    spec = build_kernel(r, ell)
    resid = spec.moment_residual()
    return [[g, spec.shifts[g], spec.coefficients[g], g, float(resid[g]), spec.half_width]
            for g in range(spec.num_splines)]


def run_kernel_info(cfg: ExperimentConfig) -> RunReport:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = kernel_info_rows(cfg.r, cfg.ell)
    write_rows(out / "kernel_info.csv", KERNEL_INFO_HEADER, rows)
    metrics = {"maxMomentResidual": max(abs(r[4]) for r in rows), "supportHalfWidth": rows[0][5],
               "coefficientSum": float(sum(r[2] for r in rows))}
    return RunReport(metrics, ["kernel_info.csv"], {})


RUNNERS = {
    "denoise": run_denoise,
    "deblur": run_deblur,
    "dg-convergence": run_dg_convergence,
    "kernel-info": run_kernel_info,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    """Run, then write ``metrics.json`` and ``manifest.json`` next to the outputs."""
    t0 = time.perf_counter()
    report = RUNNERS[cfg.experiment](cfg)
    report.timings["wallClock"] = time.perf_counter() - t0
    out = Path(cfg.out)
    write_json(out / "metrics.json", report.metrics)
    manifest = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": __version__,
        "timings": report.timings,
        "metrics": report.metrics,
        "files": sorted(report.files),
    }
    write_json(out / "manifest.json", manifest)
    report.files += ["metrics.json", "manifest.json"]
    return report


def metrics_from_outputs(out_dir, cfg: ExperimentConfig) -> dict:
    """Recompute the reported metrics from the CSV files of a finished run."""
    out = Path(out_dir)
    if cfg.experiment == "denoise":
        truth = read_csv(out / "truth.csv")["value"]
        m = {"relErrorData": rel_l2_error(read_csv(out / "data.csv")["value"], truth)}
        if (out / "filtered.csv").exists():
            m["relErrorFiltered"] = rel_l2_error(read_csv(out / "filtered.csv")["value"], truth)
        if (out / "map.csv").exists():
            m["relErrorMap"] = rel_l2_error(read_csv(out / "map.csv")["value"], truth)
        chain_files = sorted(out.glob("chain_*.csv"), key=lambda p: int(p.stem.split("_")[1]))
        if chain_files:
            us, alphas, betas = [], [], []
            burn = None
            for path in chain_files:
                cols = read_csv(path)
                burn = int(cfg.burn_in_fraction * len(cols["sampleIndex"]))
                keep = cols["sampleIndex"] >= burn
                n = len(cols) - 3
                us.append(np.column_stack([cols[f"u{i + 1}"][keep] for i in range(n)]))
                alphas.append(cols["alpha"][keep])
                betas.append(cols["beta"][keep])
            gm, *_ = gibbs_metrics(np.ascontiguousarray(np.stack(us)), np.stack(alphas), np.stack(betas),
                                   truth, cfg.band_level)
            gm["burnIn"] = burn
            m.update(gm)
        return m
    if cfg.experiment == "deblur":
        cols = read_csv(out / "images.csv")
        cols.pop("index")
        return deblur_metrics(cols)
    if cfg.experiment == "dg-convergence":
        cols = read_csv(out / "convergence.csv")
        rows = [{name: cols[name][i] for name in ("J", "k", *ERROR_COLUMNS)} for i in range(len(cols["J"]))]
        return dg_table_metrics(rows)
    raise ValueError(f"no metric recomputation for {cfg.experiment!r}")
