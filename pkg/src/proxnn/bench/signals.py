"""Piecewise constant signal generation, PSNR, and dataset file IO."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DimensionError


@dataclass(frozen=True)
class SignalDatasetSpec:
    """Piecewise constant test signals with additive white noise."""

    n: int
    d: int = 128
    noise_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("need at least one signal")
        if self.d < 2 or self.d & (self.d - 1):
            raise ConfigError(f"signal length must be a power of two, got {self.d}")
        if self.noise_sigma < 0:
            raise ConfigError("noise level must be nonnegative")


def gen_signals(spec: SignalDatasetSpec):
    """Returns (noisy, clean) arrays of shape (n, d), deterministic per seed.

    Each clean signal has max(2, Poisson(5)) constant segments with standard
    normal values, breakpoints drawn without replacement from the interior
    positions, and its mean subtracted.
    """
    rng = np.random.default_rng(spec.seed)
    d = spec.d
    clean = np.empty((spec.n, d))
    noisy = np.empty((spec.n, d))
    for i in range(spec.n):
        segments = min(max(2, int(rng.poisson(5))), d)
        breaks = np.sort(rng.choice(np.arange(1, d), size=segments - 1,
                                    replace=False))
        values = rng.standard_normal(segments)
        y = np.empty(d)
        start = 0
        for value, stop in zip(values, list(breaks) + [d]):
            y[start:stop] = value
            start = stop
        y -= y.mean()
        clean[i] = y
        noisy[i] = y + spec.noise_sigma * rng.standard_normal(d)
    return noisy, clean


def psnr(x: np.ndarray, y: np.ndarray) -> float:
    """10 log10(range(y)^2 / mean squared error); +inf when x equals y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionError(f"shape mismatch {x.shape} vs {y.shape}")
    rng = float(y.max() - y.min())
    if rng == 0.0:
        raise ValueError("PSNR is undefined for a constant reference signal")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(rng ** 2 / mse)


def save_signals(directory, noisy: np.ndarray, clean: np.ndarray,
                 spec: SignalDatasetSpec) -> None:
    """Raw little-endian float64 files plus a JSON sidecar."""
    os.makedirs(directory, exist_ok=True)
    np.ascontiguousarray(noisy, dtype="<f8").tofile(
        os.path.join(directory, "noisy.f64"))
    np.ascontiguousarray(clean, dtype="<f8").tofile(
        os.path.join(directory, "clean.f64"))
    with open(os.path.join(directory, "signals.json"), "w") as fh:
        json.dump({"N": spec.n, "d": spec.d, "sigma": spec.noise_sigma,
                   "seed": spec.seed}, fh, indent=2)


def load_signals(directory):
    """Inverse of save_signals; returns (noisy, clean, spec)."""
    with open(os.path.join(directory, "signals.json")) as fh:
        meta = json.load(fh)
    spec = SignalDatasetSpec(meta["N"], meta["d"], meta["sigma"], meta["seed"])
    shape = (spec.n, spec.d)
    noisy = np.fromfile(os.path.join(directory, "noisy.f64"),
                        dtype="<f8").reshape(shape)
    clean = np.fromfile(os.path.join(directory, "clean.f64"),
                        dtype="<f8").reshape(shape)
    return noisy, clean, spec
