"""Synthetic truths and noisy observations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import LinearOperator


@dataclass(frozen=True)
class SyntheticDataset:
    truth: np.ndarray
    data: np.ndarray
    noise_variance: float
    seed: int


def make_dataset(A: LinearOperator, truth, noise_variance: float, seed: int) -> SyntheticDataset:
    """Draw ``b = A truth + e`` with i.i.d. ``N(0, noise_variance)`` noise."""
    if not noise_variance > 0:
        raise ValueError(f"noise variance must be positive, got {noise_variance!r}")
    truth = np.asarray(truth, dtype=float)
    rng = np.random.default_rng(seed)
    clean = A.matvec(truth)
    noise = rng.normal(0.0, np.sqrt(noise_variance), size=clean.shape)
    return SyntheticDataset(truth, clean + noise, float(noise_variance), int(seed))


def denoising_signal(x):
    """Smooth periodic test signal ``sin(2 pi x) + 0.5 cos(4 pi x)^2 + 0.5``."""
    x = np.asarray(x, dtype=float)
    return np.sin(2 * np.pi * x) + 0.5 * np.cos(4 * np.pi * x) ** 2 + 0.5


def advection_initial(x):
    return np.sin(np.pi * np.asarray(x, dtype=float)) / 2 + 1


def synthetic_image(n: int) -> np.ndarray:
    """Piecewise-smooth ``n x n`` test image with values in ``[0, 1]``.

    A smooth background, a bright disc, a tilted bar and a soft blob,
    sampled at pixel centers ``(i - 1/2)/n``.
    """
    c = (np.arange(n) + 0.5) / n
    y, x = np.meshgrid(c, c, indexing="ij")
    img = 0.15 + 0.1 * np.sin(2 * np.pi * x) * np.cos(np.pi * y)
    img = np.where((x - 0.35) ** 2 + (y - 0.4) ** 2 < 0.15**2, 0.85, img)
    bar = np.abs((x - 0.7) * 0.8 + (y - 0.65) * 0.6) < 0.06
    bar &= np.abs(-(x - 0.7) * 0.6 + (y - 0.65) * 0.8) < 0.22
    img = np.where(bar, 0.6, img)
    img += 0.35 * np.exp(-((x - 0.7) ** 2 + (y - 0.2) ** 2) / (2 * 0.06**2))
    return np.clip(img, 0.0, 1.0)
