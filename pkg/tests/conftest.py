"""Shared test configuration."""

import pytest

from seqfold.models.settings import RunConfig


@pytest.fixture
def small_config() -> RunConfig:
    """A coarse cloth, the tiny network and a handful of trajectories."""
    return RunConfig.model_validate(
        {
            "model": {"preset": "tiny"},
            "sim": {
                "grid_rows": 9,
                "grid_cols": 9,
                "iterations": 10,
                "settle_iterations": 20,
                "n_waypoints": 5,
            },
            "data": {
                "random_trajectories": 2,
                "trajectory_length": 3,
                "K": 2,
                "demos_per_task": 1,
                "tasks": ["DoubleTriangle"],
            },
            "train": {"batch_size": 4, "pretrain_epochs": 1},
            "eval": {
                "tasks": ["DoubleTriangle"],
                "size_factors": [1.0],
                "rotations_deg": [0.0, 45.0],
                "write_frames": True,
            },
        }
    )
