"""Data models for the application."""

from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.dataset import (
    DatasetManifest,
    FileEntry,
    TrajectoryEntry,
)
from seqfold.models.report import EpisodeRow, EvalReport, TaskSummary
from seqfold.models.settings import (
    DataSettings,
    EvalSettings,
    ModelSettings,
    RunConfig,
    SimSettings,
    TaskId,
    TrainSettings,
    Variant,
)

__all__ = [
    "ClothSpec",
    "DataSettings",
    "DatasetManifest",
    "EpisodeRow",
    "EvalReport",
    "EvalSettings",
    "FileEntry",
    "ModelSettings",
    "PickPlaceAction",
    "RunConfig",
    "SimSettings",
    "TaskId",
    "TaskSummary",
    "TrainSettings",
    "TrajectoryEntry",
    "Variant",
]
