"""Experiment configuration and the dispatch that writes run artifacts."""

from __future__ import annotations

import dataclasses
import json
import os
import time
from dataclasses import dataclass, fields

import numpy as np

from .. import __version__
from ..checkpoint import save_checkpoint
from ..errors import ConfigError
from ..estimators import PPNNClassifier, PPNNDenoiser
from ..verify import verify_all
from ..wavelets import haar_basis_shrink, haar_frame_denoise
from .attack import attack_statistics
from .crossval import cross_validate, default_lambda_grid
from .dense import dense_forward, dense_sgd_train, random_dense
from .mnist import find_mnist, mnist_load
from .signals import SignalDatasetSpec, gen_signals, psnr

CSV_HEADER = "method,lambda,psnr_mean,loss_mean,epochs,seconds"
EXPERIMENT_KINDS = ("verify", "denoise-baseline", "denoise-train",
                    "classify", "attack")


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment settings; unknown keys are rejected."""

    kind: str
    seed: int = 0
    out: str = "runs"
    # model
    layers: int = 1
    lam: object = 0.109          # float, "cv", or "train"
    method: str = "basis"        # basis | frame (baseline denoisers)
    activation: str = "softshrink"
    # data
    n_train: int = 50000
    n_test: int = 1000
    d: int = 128
    noise_sigma: float = 0.1
    mnist_dir: str = None
    n_attack: int = 500
    # training
    epochs: int = 5
    batch_size: int = 32
    learning_rate: float = 0.5
    retraction: str = "cayley_fp"

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.method not in ("basis", "frame"):
            raise ConfigError(f"unknown baseline method {self.method!r}")
        if isinstance(self.lam, str):
            if self.lam not in ("cv", "train"):
                raise ConfigError(
                    f"lambda must be a number, 'cv', or 'train', got {self.lam!r}")
        else:
            object.__setattr__(self, "lam", float(self.lam))
        for name in ("layers", "n_train", "n_test", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")


def config_from_dict(data: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "kind" not in data:
        raise ConfigError("config is missing the experiment kind")
    return RunConfig(**data)


def _write_csv(path, rows):
    def fmt(value):
        if isinstance(value, float):
            if np.isinf(value):
                return "inf"
            return repr(value)
        return str(value)

    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _write_summary(out_dir, config: RunConfig, extra: dict, t0: float):
    summary = {
        "schema_version": 1,
        "package_version": __version__,
        "config": dataclasses.asdict(config),
        "wall_seconds": time.perf_counter() - t0,
    }
    summary.update(extra)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, default=str)


def _mean_psnr(denoised, clean):
    return float(np.mean([psnr(a, b) for a, b in zip(denoised, clean)]))


def _mean_loss(denoised, clean):
    return float(np.mean((denoised - clean) ** 2))


def _baseline_denoiser(method: str):
    fn = haar_basis_shrink if method == "basis" else haar_frame_denoise
    return lambda lam: lambda batch: np.array([fn(x, lam) for x in batch])


def _run_denoise_baseline(config: RunConfig, out_dir: str, t0: float) -> int:
    test_noisy, test_clean = gen_signals(SignalDatasetSpec(
        config.n_test, config.d, config.noise_sigma, config.seed + 1))
    make = _baseline_denoiser(config.method)
    cv_losses = None
    if config.lam == "cv":
        train_noisy, train_clean = gen_signals(SignalDatasetSpec(
            max(config.n_test, 100), config.d, config.noise_sigma, config.seed))
        grid = default_lambda_grid(1)
        lam, cv_losses = cross_validate(
            grid, 5, lambda l, xs, ys: make(l), train_noisy, train_clean,
            seed=config.seed)
    elif config.lam == "train":
        raise ConfigError("baseline denoisers have no trainable threshold")
    else:
        lam = config.lam
    denoised = make(lam)(test_noisy)
    elapsed = time.perf_counter() - t0
    rows = [
        ("noisy", 0.0, _mean_psnr(test_noisy, test_clean),
         _mean_loss(test_noisy, test_clean), 0, elapsed),
        (f"haar-{config.method}", lam, _mean_psnr(denoised, test_clean),
         _mean_loss(denoised, test_clean), 0, elapsed),
    ]
    _write_csv(os.path.join(out_dir, "metrics.csv"), rows)
    _save_signal_triples(out_dir, test_clean, test_noisy, denoised)
    extra = {"lambda": lam}
    if cv_losses is not None:
        extra["cv_losses"] = list(cv_losses)
    _write_summary(out_dir, config, extra, t0)
    return 0


def _save_signal_triples(out_dir, clean, noisy, denoised, count: int = 5):
    """Plot-ready data: a few clean/noisy/denoised triples, one CSV each."""
    for i in range(min(count, len(clean))):
        path = os.path.join(out_dir, f"signal_{i}.csv")
        with open(path, "w") as fh:
            fh.write("clean,noisy,denoised\n")
            for c, n, dn in zip(clean[i], noisy[i], denoised[i]):
                fh.write(f"{c!r},{n!r},{dn!r}\n")


def _save_history(out_dir, history):
    with open(os.path.join(out_dir, "loss_history.csv"), "w") as fh:
        fh.write("epoch,loss\n")
        for i, loss in enumerate(history):
            fh.write(f"{i},{loss!r}\n")


def _run_denoise_train(config: RunConfig, out_dir: str, t0: float) -> int:
    train_noisy, train_clean = gen_signals(SignalDatasetSpec(
        config.n_train, config.d, config.noise_sigma, config.seed))
    test_noisy, test_clean = gen_signals(SignalDatasetSpec(
        config.n_test, config.d, config.noise_sigma, config.seed + 1))

    def build(lam, lam_mode):
        return PPNNDenoiser(n_layers=config.layers, lam=lam, lam_mode=lam_mode,
                            epochs=config.epochs, batch_size=config.batch_size,
                            learning_rate=config.learning_rate,
                            seed=config.seed, retraction=config.retraction)

    cv_losses = None
    if config.lam == "cv":
        grid = default_lambda_grid(config.layers)
        lam, cv_losses = cross_validate(
            grid, 5,
            lambda l, xs, ys: build(l, "fixed").fit(xs, ys).transform,
            train_noisy, train_clean, seed=config.seed)
        model = build(lam, "fixed")
    elif config.lam == "train":
        model = build(0.1, "train")
    else:
        model = build(config.lam, "fixed")
    model.fit(train_noisy, train_clean)
    denoised = model.transform(test_noisy)
    elapsed = time.perf_counter() - t0
    rows = [
        ("noisy", 0.0, _mean_psnr(test_noisy, test_clean),
         _mean_loss(test_noisy, test_clean), 0, elapsed),
        (f"ppnn-{config.layers}layer", model.lam_,
         _mean_psnr(denoised, test_clean), _mean_loss(denoised, test_clean),
         config.epochs, elapsed),
    ]
    _write_csv(os.path.join(out_dir, "metrics.csv"), rows)
    _save_history(out_dir, model.history_)
    _save_signal_triples(out_dir, test_clean, test_noisy, denoised)
    save_checkpoint(os.path.join(out_dir, "model.ppnn"), model.params_)
    extra = {"trained_lambda": model.lam_}
    if cv_losses is not None:
        extra["cv_losses"] = list(cv_losses)
    _write_summary(out_dir, config, extra, t0)
    return 0


def _load_mnist_or_fail(config: RunConfig):
    paths = find_mnist(config.mnist_dir)
    if paths is None:
        raise ConfigError(
            "MNIST IDX files not found; set mnist_dir in the config or the "
            "PROXNN_MNIST_DIR environment variable")
    train = mnist_load(paths["train_images"], paths["train_labels"],
                       normalize=True)
    test = mnist_load(paths["test_images"], paths["test_labels"],
                      normalize=True)
    return train, test


def _run_classify(config: RunConfig, out_dir: str, t0: float) -> int:
    (train_x, train_y), (test_x, test_y) = _load_mnist_or_fail(config)
    model = PPNNClassifier(epochs=config.epochs, batch_size=config.batch_size,
                           learning_rate=config.learning_rate,
                           seed=config.seed, retraction=config.retraction)
    model.fit(train_x, train_y)
    accuracy = float(np.mean(model.predict(test_x) == test_y))
    elapsed = time.perf_counter() - t0
    rows = [("ppnn-classifier", 0.0, float("nan"), model.history_[-1],
             config.epochs, elapsed)]
    _write_csv(os.path.join(out_dir, "metrics.csv"), rows)
    _save_history(out_dir, model.history_)
    save_checkpoint(os.path.join(out_dir, "model.ppnn"), model.params_)
    _write_summary(out_dir, config, {"test_accuracy": accuracy}, t0)
    return 0


def _run_attack(config: RunConfig, out_dir: str, t0: float) -> int:
    (train_x, train_y), (test_x, test_y) = _load_mnist_or_fail(config)
    targets = np.eye(10)[train_y]
    constrained = PPNNClassifier(epochs=config.epochs,
                                 batch_size=config.batch_size,
                                 learning_rate=config.learning_rate,
                                 seed=config.seed,
                                 retraction=config.retraction)
    constrained.fit(train_x, train_y)
    twin = random_dense(784, list(constrained.hidden_widths), 10,
                        seed=config.seed)
    twin, _ = dense_sgd_train(twin, train_x, targets, config.batch_size,
                              config.learning_rate, config.epochs,
                              seed=config.seed)
    xs = test_x[:config.n_attack]
    stats_c = attack_statistics(constrained.params_, xs)
    stats_d = attack_statistics(twin, xs)
    twin_out, _ = dense_forward(twin, test_x)
    extra = {
        "constrained": stats_c, "unconstrained": stats_d,
        "constrained_accuracy": float(np.mean(
            constrained.predict(test_x) == test_y)),
        "unconstrained_accuracy": float(np.mean(
            np.argmax(twin_out, axis=1) == test_y)),
    }
    elapsed = time.perf_counter() - t0
    rows = [("attack-ppnn", 0.0, float("nan"), stats_c["median"],
             config.epochs, elapsed),
            ("attack-unconstrained", 0.0, float("nan"), stats_d["median"],
             config.epochs, elapsed)]
    _write_csv(os.path.join(out_dir, "metrics.csv"), rows)
    _write_summary(out_dir, config, extra, t0)
    return 0


def _run_verify(config: RunConfig, out_dir: str, t0: float) -> int:
    results = verify_all()
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:28s} {r.seconds:7.2f}s  {r.detail}")
    _write_summary(out_dir, config, {"checks": [dataclasses.asdict(r)
                                                for r in results]}, t0)
    return 0 if all(r.passed for r in results) else 1


def run_experiment(config: RunConfig) -> int:
    """Dispatch an experiment; returns the process exit status."""
    t0 = time.perf_counter()
    os.makedirs(config.out, exist_ok=True)
    dispatch = {
        "verify": _run_verify,
        "denoise-baseline": _run_denoise_baseline,
        "denoise-train": _run_denoise_train,
        "classify": _run_classify,
        "attack": _run_attack,
    }
    return dispatch[config.kind](config, config.out, t0)
