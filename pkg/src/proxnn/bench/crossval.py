"""K-fold cross validation of the shrinkage threshold."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError

BASE_GRID = np.arange(0.05, 0.301, 0.05)


def default_lambda_grid(layers: int) -> np.ndarray:
    """{0.05, ..., 0.30} for one layer, divided by the layer count beyond."""
    if layers < 1:
        raise ConfigError("need at least one layer")
    return BASE_GRID / layers


def cross_validate(lam_grid, folds: int, train_builder, noisy: np.ndarray,
                   clean: np.ndarray, seed: int = 0):
    """Pick the threshold with the lowest held-out squared loss.

    ``train_builder(lam, train_noisy, train_clean)`` must return a callable
    mapping a batch of noisy signals to denoised ones.  Folds come from a
    seeded permutation; ties go to the smaller threshold.  Returns
    (best lambda, per-lambda mean held-out loss).
    """
    lam_grid = np.asarray(lam_grid, dtype=float)
    if lam_grid.size == 0:
        raise ConfigError("empty threshold grid")
    if folds < 2:
        raise ConfigError("need at least two folds")
    n = noisy.shape[0]
    if n < folds:
        raise ConfigError(f"dataset of size {n} cannot be split into {folds} folds")
    perm = np.random.default_rng(seed).permutation(n)
    fold_ids = np.array_split(perm, folds)
    losses = np.zeros(len(lam_grid))
    for fold in fold_ids:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        for i, lam in enumerate(lam_grid):
            model = train_builder(float(lam), noisy[mask], clean[mask])
            out = model(noisy[fold])
            losses[i] += float(np.mean((out - clean[fold]) ** 2))
    losses /= folds
    order = np.argsort(lam_grid)
    best = order[int(np.argmin(losses[order]))]  # ties favor the smaller lambda
    return float(lam_grid[best]), losses
