"""Command-line entry point for the benchmark experiments."""

from __future__ import annotations

import sys

import click
import yaml

from ..errors import ProxnnError
from .runner import RunConfig, config_from_dict, run_experiment


def _build_config(kind, config_path, overrides):
    data = {}
    if config_path:
        with open(config_path) as fh:
            loaded = yaml.safe_load(fh) or {}
        if not isinstance(loaded, dict):
            raise click.ClickException("config file must hold a mapping")
        data.update(loaded)
    data["kind"] = kind
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_dict(data)


def _execute(kind, config_path, **overrides):
    try:
        config = _build_config(kind, config_path, overrides)
        status = run_experiment(config)
    except (ProxnnError, OSError) as exc:
        raise click.ClickException(str(exc))
    sys.exit(status)


def _lam_value(_ctx, _param, value):
    if value is None or value in ("cv", "train"):
        return value
    try:
        return float(value)
    except ValueError:
        raise click.BadParameter("expected a number, 'cv', or 'train'")


common = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="YAML file mirroring RunConfig."),
    click.option("--seed", type=int, default=None),
    click.option("--out", type=click.Path(), default=None,
                 help="Output directory for metrics and artifacts."),
]
training = [
    click.option("--lambda", "lam", callback=_lam_value, default=None,
                 help="Threshold: a number, 'cv', or 'train'."),
    click.option("--layers", type=int, default=None),
    click.option("--epochs", type=int, default=None),
    click.option("--batch-size", type=int, default=None),
    click.option("--lr", "learning_rate", type=float, default=None),
]


def _apply(options):
    def deco(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return deco


@click.group()
def main():
    """Benchmarks for orthogonality-constrained proximal networks."""


@main.command()
@_apply(common)
def verify(config_path, seed, out):
    """Run all mathematical self-check suites; exit 0 iff all pass."""
    _execute("verify", config_path, seed=seed, out=out)


@main.command("denoise-baseline")
@_apply(common)
@click.option("--method", type=click.Choice(["basis", "frame"]), default=None)
@click.option("--lambda", "lam", callback=_lam_value, default=None,
              help="Threshold: a number or 'cv'.")
def denoise_baseline(config_path, seed, out, method, lam):
    """Haar shrinkage baselines on piecewise constant signals."""
    _execute("denoise-baseline", config_path, seed=seed, out=out,
             method=method, lam=lam)


@main.command("denoise-train")
@_apply(common)
@_apply(training)
def denoise_train(config_path, seed, out, lam, layers, epochs, batch_size,
                  learning_rate):
    """Train an orthogonal-layer denoiser on piecewise constant signals."""
    _execute("denoise-train", config_path, seed=seed, out=out, lam=lam,
             layers=layers, epochs=epochs, batch_size=batch_size,
             learning_rate=learning_rate)


@main.command()
@_apply(common)
@_apply(training)
def classify(config_path, seed, out, lam, layers, epochs, batch_size,
             learning_rate):
    """Train the MNIST classifier (needs local IDX files)."""
    _execute("classify", config_path, seed=seed, out=out, epochs=epochs,
             batch_size=batch_size, learning_rate=learning_rate)


@main.command()
@_apply(common)
@_apply(training)
def attack(config_path, seed, out, lam, layers, epochs, batch_size,
           learning_rate):
    """Adversarial robustness comparison on MNIST (needs local IDX files)."""
    _execute("attack", config_path, seed=seed, out=out, epochs=epochs,
             batch_size=batch_size, learning_rate=learning_rate)


if __name__ == "__main__":
    main()
