"""Gradient attack on analytically tractable score models."""

import numpy as np
import pytest

from proxnn.bench.attack import (ScoredModel, adversarial_attack,
                                 as_scored_model, attack_statistics)
from proxnn.bench.dense import random_dense
from proxnn.errors import AttackDegenerateError
from proxnn.network import random_ppnn


def _linear_model(w):
    w = np.asarray(w, dtype=float)

    def scores(x):
        return w @ x

    def score_gradient(x, cot):
        return cot @ w

    return ScoredModel(scores, score_gradient)


def test_linear_model_flip_distance():
    # Two classes scored by w0.x and w1.x; the decision boundary is the
    # hyperplane (w0 - w1).x = 0 and the attack must cross it.
    w = np.array([[1.0, 0.0], [0.0, 1.0]])
    model = _linear_model(w)
    x = np.array([2.0, 1.0])
    res = adversarial_attack(model, x, init_eps=1e-3)
    assert res.original_class == 0
    assert res.flipped
    assert res.final_class == 1
    moved = x - res.epsilon * model.score_gradient(
        x, _cotangent(model.scores(x)))
    assert moved[1] > moved[0]


def _cotangent(scores):
    nu = int(np.argmax(scores))
    total = float(np.sum(np.abs(scores)))
    w = -(scores[nu] / total ** 2) * np.sign(scores)
    w[nu] += 1.0 / total
    return w


def test_epsilon_is_a_doubled_init():
    model = _linear_model(np.array([[1.0, 0.0], [0.0, 1.0]]))
    res = adversarial_attack(model, np.array([3.0, 1.0]), init_eps=1e-2)
    ratio = res.epsilon / 1e-2
    assert abs(ratio - 2.0 ** round(np.log2(ratio))) < 1e-12


def test_noise_norm_consistent_with_epsilon():
    model = _linear_model(np.array([[2.0, 1.0], [1.0, 3.0]]))
    x = np.array([1.5, 0.25])
    res = adversarial_attack(model, x, init_eps=1e-3)
    g = model.score_gradient(x, _cotangent(model.scores(x)))
    assert np.isclose(res.noise_norm, res.epsilon * np.linalg.norm(g))


def test_zero_scores_degenerate():
    model = ScoredModel(lambda x: np.zeros(3), lambda x, w: np.zeros_like(x))
    with pytest.raises(AttackDegenerateError):
        adversarial_attack(model, np.ones(4))


def test_zero_gradient_degenerate():
    model = ScoredModel(lambda x: np.array([1.0, 0.5]),
                        lambda x, w: np.zeros_like(x))
    with pytest.raises(AttackDegenerateError):
        adversarial_attack(model, np.ones(4))


def test_unflippable_model_reports_flipped_false():
    model = ScoredModel(lambda x: np.array([2.0, 1.0]),
                        lambda x, w: np.ones_like(x))
    res = adversarial_attack(model, np.zeros(3), max_doublings=5)
    assert not res.flipped
    assert res.final_class == res.original_class
    assert res.epsilon == 1e-2 * 2.0 ** 5


def test_statistics_skip_degenerate_points():
    w = np.array([[1.0, 0.0], [0.0, 1.0]])

    def scores(x):
        return w @ x

    model = ScoredModel(scores, lambda x, cot: cot @ w)
    xs = np.array([[1.0, 0.5], [0.0, 0.0], [0.5, 1.0]])
    stats = attack_statistics(model, xs)
    assert stats["count"] == 2
    assert stats["skipped"] == 1
    assert stats["mean"] > 0


def test_all_degenerate_raises():
    model = ScoredModel(lambda x: np.zeros(2), lambda x, w: np.zeros_like(x))
    with pytest.raises(AttackDegenerateError):
        attack_statistics(model, np.ones((3, 2)))


def test_adapters_for_both_network_families():
    ppnn = random_ppnn(4, (4,), seed=0, final_constraint="unconstrained",
                       out_dim=3, output_activation="logistic")
    dense = random_dense(4, (4,), 3, seed=1)
    x = np.random.default_rng(2).standard_normal(4)
    for params in (ppnn, dense):
        model = as_scored_model(params)
        s = model.scores(x)
        assert s.shape == (3,)
        res = adversarial_attack(model, x)
        assert res.original_class == int(np.argmax(s))
    with pytest.raises(TypeError):
        as_scored_model("not a model")
