"""Binary checkpoint round trips and corruption handling."""

import os

import numpy as np
import pytest

from proxnn.activations import Activation
from proxnn.checkpoint import MAGIC, load_checkpoint, save_checkpoint
from proxnn.errors import ConfigError
from proxnn.network import forward, random_ppnn


def _assert_params_equal(a, b):
    assert len(a.layers) == len(b.layers)
    for la, lb in zip(a.layers, b.layers):
        assert la.point.wide == lb.point.wide
        assert np.array_equal(la.point.matrix, lb.point.matrix)
        assert np.array_equal(la.bias, lb.bias)
    assert np.array_equal(a.final_weight, b.final_weight)
    assert np.array_equal(a.final_bias, b.final_bias)
    assert a.final_constraint == b.final_constraint
    assert a.activation == b.activation
    assert a.output_activation == b.output_activation
    assert np.array_equal(a.shrink, b.shrink)
    assert a.shrink_trainable == b.shrink_trainable
    assert a.shared_shrink == b.shared_shrink


def test_roundtrip_identity_constrained(tmp_path):
    params = random_ppnn(6, [9, 6, 4], seed=0,
                         activation=Activation("softshrink", lam=0.17),
                         shrink_trainable=True, shared_shrink=True)
    path = tmp_path / "model.ppnn"
    save_checkpoint(path, params)
    loaded = load_checkpoint(path)
    _assert_params_equal(params, loaded)
    x = np.random.default_rng(0).standard_normal(6)
    assert np.array_equal(forward(params, x)[0], forward(loaded, x)[0])


def test_roundtrip_unconstrained_logistic_head(tmp_path):
    params = random_ppnn(8, [8, 5], seed=1, activation=Activation("relu"),
                         final_constraint="unconstrained", out_dim=3,
                         output_activation="logistic")
    path = tmp_path / "model.ppnn"
    save_checkpoint(path, params)
    _assert_params_equal(params, load_checkpoint(path))


def test_file_starts_with_magic(tmp_path):
    params = random_ppnn(3, [3], seed=2, activation=Activation("relu"))
    path = tmp_path / "model.ppnn"
    save_checkpoint(path, params)
    with open(path, "rb") as fh:
        assert fh.read(4) == MAGIC


def test_truncated_file_rejected(tmp_path):
    params = random_ppnn(4, [4], seed=3,
                         activation=Activation("softshrink", lam=0.1))
    path = tmp_path / "model.ppnn"
    save_checkpoint(path, params)
    data = open(path, "rb").read()
    with open(path, "wb") as fh:
        fh.write(data[: len(data) // 2])
    with pytest.raises(ConfigError):
        load_checkpoint(path)


def test_trailing_bytes_rejected(tmp_path):
    params = random_ppnn(4, [4], seed=4,
                         activation=Activation("softshrink", lam=0.1))
    path = tmp_path / "model.ppnn"
    save_checkpoint(path, params)
    with open(path, "ab") as fh:
        fh.write(b"junk")
    with pytest.raises(ConfigError):
        load_checkpoint(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "model.ppnn"
    with open(path, "wb") as fh:
        fh.write(b"NOPE" + bytes(64))
    with pytest.raises(ConfigError):
        load_checkpoint(path)
