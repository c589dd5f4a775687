"""Signal generator, PSNR, and dataset file round trips."""

import numpy as np
import pytest

from proxnn.errors import ConfigError, DimensionError
from proxnn.bench.signals import (SignalDatasetSpec, gen_signals, load_signals,
                                  psnr, save_signals)


def test_spec_validation():
    with pytest.raises(ConfigError):
        SignalDatasetSpec(0)
    with pytest.raises(ConfigError):
        SignalDatasetSpec(10, d=100)  # not a power of two
    with pytest.raises(ConfigError):
        SignalDatasetSpec(10, noise_sigma=-0.1)


def test_same_seed_gives_identical_dataset():
    a = gen_signals(SignalDatasetSpec(20, 32, 0.1, 5))
    b = gen_signals(SignalDatasetSpec(20, 32, 0.1, 5))
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


def test_clean_signals_are_zero_mean_piecewise_constant():
    noisy, clean = gen_signals(SignalDatasetSpec(50, 64, 0.1, 0))
    assert np.abs(clean.mean(axis=1)).max() < 1e-12
    for row in clean:
        # piecewise constant: few distinct jump positions
        jumps = np.count_nonzero(np.abs(np.diff(row)) > 1e-12)
        assert 1 <= jumps <= 20


def test_at_least_two_segments():
    _, clean = gen_signals(SignalDatasetSpec(200, 32, 0.0, 1))
    for row in clean:
        assert np.abs(np.diff(row)).max() > 0.0


def test_noise_level_matches_sigma():
    noisy, clean = gen_signals(SignalDatasetSpec(500, 64, 0.1, 2))
    resid = noisy - clean
    assert abs(resid.std() - 0.1) < 0.005


def test_psnr_unit_example():
    y = np.array([0.0, 2.0, 0.0, 2.0])
    x = y + np.array([1.0, 0.0, 0.0, 0.0])
    # range 2, per-component mean squared error 1/4
    assert abs(psnr(x, y) - 10 * np.log10(16.0)) < 1e-12


def test_psnr_shift_invariance():
    rng = np.random.default_rng(3)
    y = rng.standard_normal(64)
    x = y + 0.1 * rng.standard_normal(64)
    assert abs(psnr(x, y) - psnr(x + 5.0, y + 5.0)) < 1e-10


def test_psnr_exact_match_is_infinite():
    y = np.array([0.0, 1.0])
    assert psnr(y, y) == float("inf")


def test_psnr_constant_reference_rejected():
    with pytest.raises(ValueError):
        psnr(np.ones(4), np.ones(4))


def test_psnr_shape_mismatch_rejected():
    with pytest.raises(DimensionError):
        psnr(np.ones(4), np.ones(5))


def test_save_load_roundtrip(tmp_path):
    spec = SignalDatasetSpec(10, 16, 0.2, 9)
    noisy, clean = gen_signals(spec)
    save_signals(tmp_path, noisy, clean, spec)
    loaded_noisy, loaded_clean, loaded_spec = load_signals(tmp_path)
    assert np.array_equal(noisy, loaded_noisy)
    assert np.array_equal(clean, loaded_clean)
    assert loaded_spec == spec
