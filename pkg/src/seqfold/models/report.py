"""Evaluation report models."""

import math
from typing import Dict, List

import numpy as np
from pydantic import BaseModel, Field, PrivateAttr

EPISODE_COLUMNS = [
    "task",
    "size",
    "rotation",
    "MPD_mm",
    "MIoU",
    "steps",
    "baseline_MPD_mm",
]


class EpisodeRow(BaseModel):
    """One evaluated cloth configuration."""

    task: str
    size: float = Field(..., description="Cloth width in meters")
    rotation: float = Field(..., description="Rotation in degrees")
    mpd_mm: float
    miou: float
    steps: int
    baseline_mpd_mm: float

    def as_csv_row(self) -> List[str]:
        return [
            self.task,
            f"{self.size:.5f}",
            f"{self.rotation:.1f}",
            repr(self.mpd_mm),
            repr(self.miou),
            str(self.steps),
            repr(self.baseline_mpd_mm),
        ]


class TaskSummary(BaseModel):
    """Aggregates for one task, recomputable from its rows."""

    task: str
    episodes: int
    mpd_mean: float
    mpd_std: float
    miou_mean: float
    baseline_mpd_mean: float


class EvalReport(BaseModel):
    """Per-episode results of one evaluation run."""

    label: str = "policy"
    grid: str
    rows: List[EpisodeRow] = Field(default_factory=list)
    runtime_s: float = 0.0
    _frames: Dict[str, List[np.ndarray]] = PrivateAttr(default_factory=dict)

    @property
    def frames(self) -> Dict[str, List[np.ndarray]]:
        """Rendered depth frames per episode key, one per executed step."""
        return self._frames

    def summaries(self) -> List[TaskSummary]:
        out = []
        for task in dict.fromkeys(row.task for row in self.rows):
            rows = [r for r in self.rows if r.task == task]
            mpd = np.array([r.mpd_mm for r in rows])
            out.append(
                TaskSummary(
                    task=task,
                    episodes=len(rows),
                    mpd_mean=float(mpd.mean()),
                    mpd_std=float(mpd.std()),
                    miou_mean=float(np.mean([r.miou for r in rows])),
                    baseline_mpd_mean=float(
                        np.mean([r.baseline_mpd_mm for r in rows])
                    ),
                )
            )
        return out

    def mean_mpd(self, task: str) -> float:
        values = [r.mpd_mm for r in self.rows if r.task == task]
        return float(np.mean(values)) if values else math.nan
