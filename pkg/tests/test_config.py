"""Tests for the configuration module."""

import json
import os
from unittest.mock import patch

import pytest

from seqfold.config import ConfigManager, load_config
from seqfold.models.settings import RunConfig, TaskId, Variant
from seqfold.utils.exceptions import ConfigError


def _write(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


@patch.dict(os.environ, {}, clear=True)
def test_config_defaults(tmp_path):
    """Test an empty document gives the default settings."""
    settings = load_config(_write(tmp_path, {}))

    assert settings.model.H == 64
    assert settings.model.F == 5
    assert settings.model.variant == Variant.FULL
    assert settings.train.lr == 1e-4
    assert settings.eval.grid == "desk"
    assert settings.data.tasks == list(TaskId)


def test_presets_fill_missing_keys(tmp_path):
    """Test a preset fills keys the document leaves out."""
    settings = load_config(
        _write(
            tmp_path,
            {
                "model": {"preset": "tiny", "D": 32},
                "train": {"preset": "overfit"},
            },
        )
    )

    assert settings.model.H == 32
    assert settings.model.D == 32
    assert settings.model.decoder_channels == [8, 8, 8, 8, 1]
    assert settings.train.max_samples == 20
    assert settings.train.max_steps == 500


def test_goal_conditioned_uses_one_subgoal(tmp_path):
    """Test the goal-conditioned variant forces a single sub-goal."""
    settings = load_config(
        _write(tmp_path, {"model": {"variant": "GoalConditioned"}})
    )

    assert settings.model.F == 1


def test_patch_size_must_divide_image(tmp_path):
    """Test a patch size that does not tile the image is rejected."""
    path = _write(tmp_path, {"model": {"P": 15}})

    with pytest.raises(ConfigError) as exc_info:
        load_config(path)

    assert "Invalid configuration" in exc_info.value.message
    assert exc_info.value.detail.startswith("model:")
    assert "divisible by P=15" in exc_info.value.detail


def test_unknown_key(tmp_path):
    """Test unknown keys are named with their dotted path."""
    path = _write(tmp_path, {"train": {"learning_rate": 0.1}})

    with pytest.raises(ConfigError) as exc_info:
        load_config(path)

    assert exc_info.value.detail == "train.learning_rate: unknown key"


def test_missing_file(tmp_path):
    """Test a missing config file is a config error naming the path."""
    path = tmp_path / "absent.json"

    with pytest.raises(ConfigError, match="Config file not found"):
        load_config(path)


def test_not_an_object(tmp_path):
    """Test a JSON array is rejected."""
    path = tmp_path / "config.json"
    path.write_text("[1, 2]")

    with pytest.raises(ConfigError, match="JSON object"):
        load_config(path)


@patch.dict(os.environ, {}, clear=True)
def test_env_var_points_at_config(tmp_path):
    """Test SEQFOLD_CONFIG is used when no path is given."""
    path = _write(tmp_path, {"eval": {"grid": "real"}})

    with patch.dict(os.environ, {"SEQFOLD_CONFIG": str(path)}):
        manager = ConfigManager()
        assert manager.path == path
        assert manager.settings.eval.grid == "real"


def test_echo_writes_reloadable_config(tmp_path):
    """Test the echoed effective config loads back to the same settings."""
    manager = ConfigManager(_write(tmp_path, {"model": {"preset": "tiny"}}))

    effective = manager.echo(tmp_path / "run", seed=7, subcommand="train")

    assert load_config(effective) == manager.settings
    info = json.loads((tmp_path / "run" / "run_info.json").read_text())
    assert info["seed"] == 7
    assert info["subcommand"] == "train"


def test_override_seed(tmp_path):
    """Test a command-line seed replaces every section seed."""
    manager = ConfigManager(_write(tmp_path, {}))

    settings = manager.override_seed(11)

    assert settings.data.base_seed == 11
    assert settings.train.seed == 11
    assert settings.eval.seed == 11
    assert manager.settings is settings
    assert manager.override_seed(None) is settings


def test_show_config():
    """Test show_config returns the settings as plain JSON values."""
    manager = ConfigManager()
    manager._settings = RunConfig.model_validate(
        {"model": {"variant": "NoTimeAttn"}}
    )

    config_dict = manager.show_config()

    assert config_dict["model"]["variant"] == "NoTimeAttn"
    assert config_dict["eval"]["tasks"] == [
        "DoubleTriangle",
        "AllCornersInward",
    ]
