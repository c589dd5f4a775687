"""Benchmark harness: datasets, metrics, experiments, and the CLI."""

from .attack import adversarial_attack, attack_statistics
from .crossval import cross_validate, default_lambda_grid
from .mnist import mnist_load
from .runner import RunConfig, config_from_dict, run_experiment
from .signals import SignalDatasetSpec, gen_signals, psnr

__all__ = [
    "adversarial_attack", "attack_statistics", "cross_validate",
    "default_lambda_grid", "mnist_load", "RunConfig", "config_from_dict",
    "run_experiment", "SignalDatasetSpec", "gen_signals", "psnr",
]
