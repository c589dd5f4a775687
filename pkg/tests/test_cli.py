"""CLI wiring: config merging, option validation, small end-to-end run."""

import json
import os

import numpy as np
import yaml
from click.testing import CliRunner

from proxnn.bench.cli import main


def test_denoise_baseline_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    config = tmp_path / "config.yaml"
    config.write_text(yaml.safe_dump({"n_test": 20, "d": 32, "lam": 0.1}))
    runner = CliRunner()
    result = runner.invoke(main, ["denoise-baseline", "--config", str(config),
                                  "--method", "basis", "--out", str(out)])
    assert result.exit_code == 0, result.output
    with open(out / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["config"]["d"] == 32
    assert summary["lambda"] == 0.1
    with open(out / "metrics.csv") as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "method,lambda,psnr_mean,loss_mean,epochs,seconds"
    assert lines[1].startswith("noisy,")
    assert lines[2].startswith("haar-basis,")
    # denoising should beat the noisy row
    noisy_psnr = float(lines[1].split(",")[2])
    basis_psnr = float(lines[2].split(",")[2])
    assert basis_psnr > noisy_psnr
    assert os.path.exists(out / "signal_0.csv")


def test_flag_overrides_config_file(tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text(yaml.safe_dump({"n_test": 10, "d": 16, "lam": 0.1,
                                      "seed": 7}))
    runner = CliRunner()
    out = tmp_path / "run"
    result = runner.invoke(main, ["denoise-baseline", "--config", str(config),
                                  "--lambda", "0.05", "--seed", "3",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    with open(out / "summary.json") as fh:
        summary = json.load(fh)
    assert summary["config"]["lam"] == 0.05
    assert summary["config"]["seed"] == 3


def test_unknown_config_key_rejected(tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text(yaml.safe_dump({"n_test": 10, "d": 16, "lr": 0.5}))
    runner = CliRunner()
    result = runner.invoke(main, ["denoise-baseline", "--config", str(config)])
    assert result.exit_code != 0
    assert "unknown config keys" in result.output


def test_bad_lambda_flag_rejected():
    runner = CliRunner()
    result = runner.invoke(main, ["denoise-baseline", "--lambda", "abc"])
    assert result.exit_code != 0
    assert "expected a number" in result.output


def test_trainable_lambda_invalid_for_baseline(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["denoise-baseline", "--lambda", "train",
                                  "--out", str(tmp_path / "run")])
    assert result.exit_code != 0
    assert "no trainable threshold" in result.output


def test_non_mapping_config_rejected(tmp_path):
    config = tmp_path / "config.yaml"
    config.write_text("- just\n- a\n- list\n")
    runner = CliRunner()
    result = runner.invoke(main, ["denoise-baseline", "--config", str(config)])
    assert result.exit_code != 0
    assert "mapping" in result.output


def test_denoise_train_small_run(tmp_path):
    out = tmp_path / "run"
    config = tmp_path / "config.yaml"
    config.write_text(yaml.safe_dump({
        "n_train": 512, "n_test": 32, "d": 16, "epochs": 1,
        "batch_size": 32, "learning_rate": 0.5, "lam": 0.1}))
    runner = CliRunner()
    result = runner.invoke(main, ["denoise-train", "--config", str(config),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert os.path.exists(out / "model.ppnn")
    assert os.path.exists(out / "loss_history.csv")
    with open(out / "summary.json") as fh:
        summary = json.load(fh)
    assert np.isclose(summary["trained_lambda"], 0.1)


def test_classify_without_mnist_fails_cleanly(tmp_path, monkeypatch):
    monkeypatch.delenv("PROXNN_MNIST_DIR", raising=False)
    runner = CliRunner()
    result = runner.invoke(main, ["classify", "--out", str(tmp_path / "run")])
    assert result.exit_code != 0
    assert "MNIST" in result.output
