"""Activation catalog: values, derivatives, potentials, and the prox oracle."""

import numpy as np
import pytest

from proxnn.activations import (Activation, activation_apply,
                                activation_derivative, activation_potential,
                                potential_of, prox_oracle_1d, soft_shrink)


def test_soft_shrink_values():
    x = np.array([-2.0, -0.2, 0.0, 0.2, 2.0])
    out = soft_shrink(x, 0.5)
    assert np.allclose(out, [-1.5, 0.0, 0.0, 0.0, 1.5])


def test_soft_shrink_scalar_threshold_zero_is_identity():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(50)
    assert np.allclose(soft_shrink(x, 0.0), x)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        Activation("swish")


def test_negative_shrink_threshold_rejected():
    with pytest.raises(ValueError):
        Activation("softshrink", lam=-0.1)


def test_prelu_slope_validated():
    with pytest.raises(ValueError):
        Activation("prelu", alpha=1.5)
    with pytest.raises(ValueError):
        Activation("prelu", alpha=0.0)


def test_linear_and_relu_apply():
    x = np.array([-1.0, 0.0, 2.0])
    assert np.allclose(activation_apply(Activation("linear"), x), x)
    assert np.allclose(activation_apply(Activation("relu"), x), [0.0, 0.0, 2.0])


def test_all_kinds_are_nonexpansive_on_random_points():
    # each catalog entry is a proximity operator, hence 1-Lipschitz
    rng = np.random.default_rng(1)
    for kind in ("linear", "salu", "softshrink", "relu", "prelu",
                 "bent_identity", "isrlu", "isru", "arctan", "tanh",
                 "elliott", "arcsinh", "logarithmic"):
        act = Activation(kind, lam=0.3, alpha=0.5)
        x = rng.standard_normal(200) * 3
        y = rng.standard_normal(200) * 3
        lhs = np.abs(activation_apply(act, x) - activation_apply(act, y))
        assert np.all(lhs <= np.abs(x - y) + 1e-12), kind


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(2)
    h = 1e-6
    for kind in ("salu", "bent_identity", "isrlu", "isru", "arctan", "tanh",
                 "elliott", "arcsinh", "logarithmic"):
        act = Activation(kind, alpha=0.5)
        x = rng.standard_normal(100) * 2
        num = (activation_apply(act, x + h) - activation_apply(act, x - h)) / (2 * h)
        assert np.allclose(activation_derivative(act, x), num, atol=1e-6), kind


def test_softshrink_potential_example_values():
    act = Activation("softshrink", lam=1.0)
    # potential of soft shrinkage is lam|y| + ... evaluated through the
    # catalog; at y=0 every potential vanishes
    assert activation_potential(act, 0.0) == 0.0
    pot = potential_of(act)
    assert pot(0.0) == 0.0


def test_prox_oracle_recovers_soft_shrinkage():
    act = Activation("softshrink", lam=0.4)
    pot = potential_of(act)
    for x in (-1.3, -0.2, 0.0, 0.7, 2.5):
        direct = float(soft_shrink(np.array([x]), 0.4)[0])
        numeric = prox_oracle_1d(pot, x)
        assert abs(direct - numeric) < 1e-6


def test_prox_oracle_recovers_relu():
    act = Activation("relu")
    pot = potential_of(act)
    for x in (-2.0, -0.5, 0.3, 1.7):
        assert abs(prox_oracle_1d(pot, x) - max(x, 0.0)) < 1e-6


def test_prox_oracle_matches_catalog_for_smooth_kinds():
    rng = np.random.default_rng(3)
    for kind in ("tanh", "arctan", "arcsinh", "bent_identity"):
        act = Activation(kind)
        pot = potential_of(act)
        for x in rng.standard_normal(5) * 2:
            direct = float(activation_apply(act, np.array([x]))[0])
            assert abs(prox_oracle_1d(pot, float(x)) - direct) < 1e-5, kind
