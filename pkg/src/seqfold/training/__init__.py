"""Training, closed-loop rollout and evaluation."""

from seqfold.training.evaluation import (
    ConfigGrid,
    GridPoint,
    MpdOrdering,
    compare_to_untrained,
    config_grid,
    evaluate,
    evaluate_task,
    rollout_episode,
    run_episode,
)
from seqfold.training.report import read_episodes, write_report
from seqfold.training.rollout import RolloutResult, run_policy
from seqfold.training.trainer import (
    LossRecord,
    Trainer,
    TrainResult,
    train,
    write_loss_trace,
)

__all__ = [
    "ConfigGrid",
    "GridPoint",
    "LossRecord",
    "MpdOrdering",
    "RolloutResult",
    "TrainResult",
    "Trainer",
    "compare_to_untrained",
    "config_grid",
    "evaluate",
    "evaluate_task",
    "read_episodes",
    "rollout_episode",
    "run_episode",
    "run_policy",
    "train",
    "write_loss_trace",
    "write_report",
]
