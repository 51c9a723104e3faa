"""Command-line entry point: ``bsiac <denoise|deblur|dg-convergence|kernel-info>``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .config import ConfigError, parse_config_file, resolve_config
from .dg import IntegrationError
from .experiments import KERNEL_INFO_HEADER, kernel_info_rows, run_experiment
from .filter_matrix import UnsupportedConfiguration
from .io import InputError
from .posterior import ModelError
from .solvers import SolverError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_ESTIMATOR_ALIASES = {"deterministic": "filter"}


def _key_value(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--set", dest="overrides", action="append", type=_key_value, default=[],
                        metavar="KEY=VALUE", help="override any configuration key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--estimator", choices=["all", "map", "gibbs", "filter", "deterministic"])
    sampling.add_argument("--samples", type=int)
    sampling.add_argument("--chains", type=int)

    parser = argparse.ArgumentParser(prog="bsiac", description="Deterministic and Bayesian SIAC filtering experiments")
    sub = parser.add_subparsers(dest="experiment", required=True)
    sub.add_parser("denoise", parents=[common, sampling], help="1D denoising of a smooth periodic signal")
    sub.add_parser("deblur", parents=[common, sampling], help="2D separable Gaussian deblurring")
    sub.add_parser("dg-convergence", parents=[common], help="DG post-processing convergence table")
    kinfo = sub.add_parser("kernel-info", parents=[common], help="print SIAC kernel coefficients")
    kinfo.add_argument("--r", type=int)
    kinfo.add_argument("--ell", type=int)
    return parser


def _overrides(args) -> dict:
    values = {}
    for name in ("seed", "out", "estimator", "samples", "chains", "r", "ell"):
        v = getattr(args, name, None)
        if v is not None:
            values[name] = _ESTIMATOR_ALIASES.get(v, v) if name == "estimator" else v
    values.update(dict(args.overrides))
    if "estimator" in values:
        values["estimator"] = _ESTIMATOR_ALIASES.get(values["estimator"], values["estimator"])
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = resolve_config(args.experiment, file_values, _overrides(args))
        if cfg.experiment == "kernel-info":
            rows = kernel_info_rows(cfg.r, cfg.ell)
            print(",".join(KERNEL_INFO_HEADER))
            for row in rows:
                print(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row))
        report = run_experiment(cfg)
    except (ConfigError, InputError, UnsupportedConfiguration, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, IntegrationError, ModelError, np.linalg.LinAlgError, FloatingPointError,
            RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if cfg.experiment != "kernel-info":
        for key, value in sorted(report.metrics.items()):
            print(f"{key} = {value}")
        print(f"outputs written to {cfg.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
