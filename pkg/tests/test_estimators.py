"""Estimator wrappers: sklearn protocol compliance and basic learning."""

import numpy as np
import pytest
from sklearn.base import clone

from proxnn.bench.signals import SignalDatasetSpec, gen_signals, psnr
from proxnn.errors import ConfigError
from proxnn.estimators import PPNNClassifier, PPNNDenoiser


def test_denoiser_params_roundtrip():
    est = PPNNDenoiser(n_layers=2, lam=0.07, epochs=3, seed=5)
    params = est.get_params()
    assert params["n_layers"] == 2
    assert params["lam"] == 0.07
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(lam=0.2)
    assert est.lam == 0.2


def test_classifier_params_roundtrip():
    est = PPNNClassifier(hidden_widths=(8,), epochs=2)
    assert clone(est).get_params() == est.get_params()


def test_denoiser_improves_psnr():
    noisy, clean = gen_signals(SignalDatasetSpec(10000, 128, 0.1, seed=0))
    hnoisy, hclean = gen_signals(SignalDatasetSpec(200, 128, 0.1, seed=1))
    est = PPNNDenoiser(lam=0.1, epochs=8, seed=0).fit(noisy, clean)
    out = est.transform(hnoisy)
    base = np.mean([psnr(n, c) for n, c in zip(hnoisy, hclean)])
    got = np.mean([psnr(o, c) for o, c in zip(out, hclean)])
    assert got > base + 0.2
    assert len(est.history_) == 8
    assert est.history_[-1] < est.history_[0]
    assert est.lam_ == 0.1  # fixed mode leaves the threshold alone


def test_denoiser_trainable_threshold_moves():
    noisy, clean = gen_signals(SignalDatasetSpec(2000, 32, 0.1, seed=0))
    est = PPNNDenoiser(lam=0.1, lam_mode="train", epochs=2,
                       seed=0).fit(noisy, clean)
    assert est.lam_ != 0.1
    assert est.lam_ >= 0.0
    assert len(est.history_) == 2


def test_denoiser_rejects_unknown_mode():
    noisy, clean = gen_signals(SignalDatasetSpec(50, 8, 0.1, seed=0))
    with pytest.raises(ConfigError):
        PPNNDenoiser(lam_mode="adaptive").fit(noisy, clean)


def test_classifier_separable_blobs():
    rng = np.random.default_rng(0)
    centers = np.array([[3.0, 0.0, 0.0, 0.0], [0.0, 3.0, 0.0, 0.0],
                        [0.0, 0.0, 3.0, 0.0]])
    labels = rng.integers(0, 3, size=300)
    x = centers[labels] + 0.3 * rng.standard_normal((300, 4))
    est = PPNNClassifier(hidden_widths=(4, 4), epochs=40, batch_size=32,
                         learning_rate=1.0, seed=0)
    est.fit(x, labels + 5)  # nonstandard label values
    assert np.array_equal(est.classes_, [5, 6, 7])
    acc = np.mean(est.predict(x) == labels + 5)
    assert acc > 0.9
    proba = est.predict_proba(x[:10])
    assert proba.shape == (10, 3)
    assert np.allclose(proba.sum(axis=1), 1.0)
