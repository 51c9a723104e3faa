"""Flat ``key = value`` experiment configuration.

A config file holds one assignment per line; ``#`` starts a comment.
Command-line overrides are applied on top, then per-experiment defaults
fill the rest.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

EXPERIMENTS = ("denoise", "deblur", "dg-convergence", "kernel-info")


class ConfigError(ValueError):
    """Invalid or incomplete configuration; message names the field."""


def _int_list(text):
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    return [int(v) for v in str(text).replace(" ", "").split(",") if v]


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    out: str = "out"
    estimator: str = "all"
    # mesh / kernel
    cells: int = 25
    degree: int = 3
    layout: str = "equidistant"
    r: int | None = None
    ell: int | None = None
    # data
    noise_variance: float = 5e-2
    blur_gamma: float = 1.5e-2
    blur: str = "gaussian"
    image_size: int = 64
    image: str | None = None
    # DG study
    cells_list: list = field(default_factory=lambda: [16, 32, 64, 128])
    degrees: list = field(default_factory=lambda: [1, 2, 3])
    domain_a: float = 0.0
    domain_b: float = 2.0
    final_time: float = 1.0
    cfl: float | None = None
    # hyper-priors
    c_alpha: float = 1.0
    d_alpha: float = 1e-3
    c_beta: float = 1.0
    d_beta: float = 1e-3
    # MAP
    bcd_init: str = "zero"
    max_iterations: int = 1000
    rel_tol: float = 1e-4
    abs_tol: float = 1e-8
    solver: str = "auto"
    # Gibbs
    samples: int = 10_000
    chains: int = 4
    burn_in_fraction: float = 0.1
    band_level: float = 0.9
    write_chains: bool = True
    workers: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


DEFAULTS = {
    "denoise": dict(cells=25, degree=3, layout="equidistant", r=6, ell=4, noise_variance=5e-2,
                    estimator="all", bcd_init="zero"),
    "deblur": dict(image_size=64, degree=1, layout="equidistant", r=2, ell=2, noise_variance=1e-5,
                   blur_gamma=1.5e-2, estimator="all", bcd_init="unit"),
    "dg-convergence": dict(layout="gauss-legendre", bcd_init="zero"),
    "kernel-info": dict(r=2, ell=2),
}

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_ALIASES = {"seed": "seed", "n": "image_size", "J": "cells", "k": "degree", "sigma2": "noise_variance",
            "gamma": "blur_gamma"}
_CHOICES = {
    "estimator": ("all", "map", "gibbs", "filter"),
    "layout": ("equidistant", "gauss-legendre"),
    "blur": ("gaussian", "identity"),
    "bcd_init": ("zero", "unit"),
    "solver": ("auto", "direct", "cg"),
}


def parse_config_file(path) -> dict:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = value
    return values


def _coerce(name: str, value):
    if value is None:
        return None
    f = _FIELDS[name]
    kind = str(f.type)
    try:
        if name in ("cells_list", "degrees"):
            return _int_list(value)
        if kind.startswith("bool"):
            if isinstance(value, bool):
                return value
            low = str(value).strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if kind.startswith("int"):
            if str(value).strip().lower() == "none":
                return None
            fv = float(value)
            if fv != int(fv):
                raise ValueError(value)
            return int(fv)
        if kind.startswith("float"):
            if str(value).strip().lower() == "none":
                return None
            return float(value)
        return None if str(value).lower() == "none" and "None" in kind else str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{name}': cannot interpret {value!r} as {kind}") from None


def resolve_config(experiment: str, file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge defaults, file values and overrides, then validate."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"field 'experiment': unknown experiment {experiment!r}")
    merged = dict(DEFAULTS[experiment])
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            name = _ALIASES.get(key, key).replace("-", "_")
            if name == "experiment":
                if value != experiment:
                    raise ConfigError(f"field 'experiment': config says {value!r} but subcommand is {experiment!r}")
                continue
            if name not in _FIELDS:
                raise ConfigError(f"field '{key}': unknown configuration key")
            merged[name] = _coerce(name, value)
    cfg = ExperimentConfig(experiment=experiment, **merged)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> None:
    def bad(name, why):
        raise ConfigError(f"field '{name}': {why} (got {getattr(cfg, name)!r})")

    for name, choices in _CHOICES.items():
        if getattr(cfg, name) not in choices:
            bad(name, f"must be one of {', '.join(choices)}")
    for name in ("noise_variance", "blur_gamma", "c_alpha", "d_alpha", "c_beta", "d_beta", "rel_tol",
                 "abs_tol", "final_time"):
        if not getattr(cfg, name) > 0:
            bad(name, "must be positive")
    for name in ("cells", "image_size", "samples", "chains", "max_iterations", "workers"):
        if getattr(cfg, name) < 1:
            bad(name, "must be a positive integer")
    if cfg.degree < 0:
        bad("degree", "must be nonnegative")
    if cfg.r is not None and cfg.r < 0:
        bad("r", "must be nonnegative")
    if cfg.ell is not None and cfg.ell < 1:
        bad("ell", "must be positive")
    if not 0 <= cfg.burn_in_fraction < 1:
        bad("burn_in_fraction", "must lie in [0, 1)")
    if not 0 < cfg.band_level < 1:
        bad("band_level", "must lie in (0, 1)")
    if cfg.cfl is not None and not cfg.cfl > 0:
        bad("cfl", "must be positive")
    if cfg.experiment == "dg-convergence":
        if not cfg.cells_list or cfg.cells_list != sorted(cfg.cells_list) or min(cfg.cells_list) < 2:
            bad("cells_list", "must be an ascending list of cell counts >= 2")
        if not cfg.degrees or any(k not in (1, 2, 3) for k in cfg.degrees):
            bad("degrees", "entries must be 1, 2 or 3")
        if not cfg.domain_b > cfg.domain_a:
            bad("domain_b", "must exceed domain_a")
    if cfg.experiment == "deblur":
        if cfg.image is None and cfg.image_size % (cfg.degree + 1):
            bad("image_size", "must be divisible by degree + 1")
    if cfg.experiment in ("denoise", "deblur", "kernel-info") and (cfg.r is None or cfg.ell is None):
        bad("r", "kernel parameters r and ell are required")
