"""Tests for the command-line interface and its exit codes."""

import json
import os
from unittest.mock import patch

import pytest

from seqfold.cli import dispatch
from seqfold.data import load_dataset
from seqfold.network import FoldPolicyNet, save_checkpoint
from seqfold.selftest import CheckResult
from seqfold.training import read_episodes


@pytest.fixture
def config_file(tmp_path, small_config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(small_config.model_dump(mode="json")))
    return path


@pytest.fixture(autouse=True)
def _clean_env():
    with patch.dict(os.environ, {}, clear=True):
        yield


def test_no_arguments_prints_usage(capsys):
    """Test running without a subcommand is a usage error."""
    assert dispatch([]) == 2
    assert "gen-random" in capsys.readouterr().err


def test_unknown_subcommand():
    """Test an unknown subcommand is a usage error."""
    assert dispatch(["fold-everything"]) == 2


def test_missing_config_option():
    """Test subcommands that need a config refuse to run without one."""
    assert dispatch(["gen-random"]) == 2


def test_bad_log_level(config_file):
    """Test the log level is one of the known names."""
    args = ["show-config", "-c", str(config_file), "--log-level", "LOUD"]

    assert dispatch(args) == 2


def test_show_config(config_file):
    """Test the effective configuration prints."""
    assert dispatch(["show-config", "-c", str(config_file)]) == 0


def test_show_config_invalid(tmp_path):
    """Test an invalid configuration exits with a runtime error."""
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"model": {"P": 15}}))

    assert dispatch(["show-config", "-c", str(path)]) == 1


def test_config_from_environment(config_file):
    """Test SEQFOLD_CONFIG stands in for --config."""
    with patch.dict(os.environ, {"SEQFOLD_CONFIG": str(config_file)}):
        assert dispatch(["show-config"]) == 0


def test_gen_random(tmp_path, config_file):
    """Test random data generation writes a dataset and provenance."""
    out = tmp_path / "random"

    code = dispatch(
        ["gen-random", "-c", str(config_file), "-o", str(out), "--seed", "3"]
    )

    assert code == 0
    assert len(load_dataset(out)) == 2
    info = json.loads((out / "run_info.json").read_text())
    assert info["seed"] == 3
    effective = json.loads((out / "effective_config.json").read_text())
    assert effective["data"]["base_seed"] == 3
    assert (out / "run.log").is_file()


def test_gen_demos_per_task(tmp_path, config_file):
    """Test one demo dataset directory per requested task."""
    out = tmp_path / "demos"

    code = dispatch(
        [
            "gen-demos",
            "-c",
            str(config_file),
            "-o",
            str(out),
            "--task",
            "DoubleStraight",
        ]
    )

    assert code == 0
    dataset = load_dataset(out / "DoubleStraight")
    assert dataset.manifest.task == "DoubleStraight"


def test_eval_needs_a_checkpoint(tmp_path, config_file):
    """Test evaluation without any checkpoint is a runtime error."""
    code = dispatch(["eval", "-c", str(config_file), "-o", str(tmp_path)])

    assert code == 1


def test_eval_with_untrained_baseline(tmp_path, config_file, small_config):
    """Test evaluation writes the policy and untrained reports."""
    checkpoint = save_checkpoint(
        FoldPolicyNet(small_config.model, seed=0), tmp_path / "model.ckpt"
    )
    out = tmp_path / "eval"

    code = dispatch(
        [
            "eval",
            "-c",
            str(config_file),
            "-o",
            str(out),
            "--checkpoint",
            str(checkpoint),
            "--untrained",
        ]
    )

    assert code == 0
    assert len(read_episodes(out / "episodes.csv")) == 2
    assert len(read_episodes(out / "untrained" / "episodes.csv")) == 2
    assert (out / "frames" / "DoubleTriangle_00").is_dir()


def test_rollout_writes_frames(tmp_path, config_file, small_config):
    """Test a single rollout writes one frame per step."""
    checkpoint = save_checkpoint(
        FoldPolicyNet(small_config.model, seed=0), tmp_path / "model.ckpt"
    )
    out = tmp_path / "rollout"

    code = dispatch(
        [
            "rollout",
            "-c",
            str(config_file),
            "-o",
            str(out),
            "--checkpoint",
            str(checkpoint),
            "--rotation",
            "30",
        ]
    )

    assert code == 0
    (row,) = read_episodes(out / "episodes.csv")
    assert row["rotation"] == "30.0"
    frames = out / "frames" / "DoubleTriangle_00"
    assert len(list(frames.glob("*.png"))) == 2


def test_corrupt_checkpoint(tmp_path, config_file):
    """Test a truncated checkpoint exits with a runtime error."""
    bad = tmp_path / "model.ckpt"
    bad.write_bytes(b"FOLDS1")

    code = dispatch(
        [
            "rollout",
            "-c",
            str(config_file),
            "-o",
            str(tmp_path / "out"),
            "--checkpoint",
            str(bad),
        ]
    )

    assert code == 1


def test_gradcheck(tmp_path, config_file):
    """Test the tiny-model gradient check passes."""
    code = dispatch(
        ["gradcheck", "-c", str(config_file), "-o", str(tmp_path)]
    )

    assert code == 0


def test_selftest_failure_exit_code():
    """Test a failed self-check exits with 1."""
    results = [
        CheckResult("gradients", True, "ok"),
        CheckResult("fold", False, "MPD 40.0 mm"),
    ]

    with patch("seqfold.cli.run_selftest", return_value=results):
        assert dispatch(["selftest"]) == 1


def test_selftest_success_exit_code():
    """Test passing self-checks exit with 0."""
    results = [CheckResult("gradients", True, "ok")]

    with patch("seqfold.cli.run_selftest", return_value=results):
        assert dispatch(["selftest"]) == 0
