"""Gradient-based adversarial attack on multi-class score networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import AttackDegenerateError
from ..network import PpnnParams, forward, input_gradient
from .dense import DenseParams, dense_forward, dense_input_gradient


@dataclass(frozen=True)
class ScoredModel:
    """Adapter bundling a score map with its input-gradient oracle."""

    scores: callable          # x -> class-score vector
    score_gradient: callable  # (x, cotangent) -> gradient w.r.t. x


def as_scored_model(params) -> ScoredModel:
    if isinstance(params, PpnnParams):
        return ScoredModel(lambda x: forward(params, x)[0],
                           lambda x, w: input_gradient(params, x, w))
    if isinstance(params, DenseParams):
        return ScoredModel(lambda x: dense_forward(params, x)[0][0],
                           lambda x, w: dense_input_gradient(params, x, w))
    if isinstance(params, ScoredModel):
        return params
    raise TypeError(f"cannot attack a {type(params).__name__}")


@dataclass(frozen=True)
class AttackResult:
    epsilon: float
    noise_norm: float
    flipped: bool
    original_class: int
    final_class: int


def adversarial_attack(model, x: np.ndarray, init_eps: float = 1e-2,
                       max_doublings: int = 40) -> AttackResult:
    """Find the smallest doubled step along the normalized-score gradient.

    With scores f and predicted class nu = argmax f, the attack direction
    is the input gradient of f_nu / |f|_1 (the normalized confidence).
    Starting at ``init_eps``, the step doubles while the prediction at
    x - eps g is unchanged, for at most ``max_doublings`` doublings.
    """
    model = as_scored_model(model)
    x = np.asarray(x, dtype=float)
    scores = model.scores(x)
    nu = int(np.argmax(scores))
    total = float(np.sum(np.abs(scores)))
    if total == 0.0:
        raise AttackDegenerateError("all class scores are zero")
    # cotangent of f_nu / sum_i |f_i|
    w = -(scores[nu] / total ** 2) * np.sign(scores)
    w[nu] += 1.0 / total
    g = model.score_gradient(x, w)
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        raise AttackDegenerateError("normalized-score gradient vanishes")
    eps = init_eps
    final = nu
    flipped = False
    for _ in range(max_doublings + 1):
        final = int(np.argmax(model.scores(x - eps * g)))
        if final != nu:
            flipped = True
            break
        if eps >= init_eps * 2.0 ** max_doublings:
            break
        eps *= 2.0
    return AttackResult(eps, eps * gnorm, flipped, nu, final)


def attack_statistics(model, xs: np.ndarray, init_eps: float = 1e-2,
                      max_doublings: int = 40) -> dict:
    """Mean, std, and median of the attack noise norm over a test set."""
    model = as_scored_model(model)
    norms = []
    skipped = 0
    for x in xs:
        try:
            res = adversarial_attack(model, x, init_eps, max_doublings)
        except AttackDegenerateError:
            skipped += 1
            continue
        norms.append(res.noise_norm)
    norms = np.asarray(norms)
    if norms.size == 0:
        raise AttackDegenerateError("every attack was degenerate")
    return {"mean": float(norms.mean()), "std": float(norms.std()),
            "median": float(np.median(norms)), "count": int(norms.size),
            "skipped": skipped}
