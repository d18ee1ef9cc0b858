"""Settings models for the application.

One JSON document drives every subcommand. Each section rejects unknown
keys, and sections that carry a ``preset`` fill any key the document
leaves out from that preset.
"""

import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Variant(str, Enum):
    """Network variants, the full model and its two ablations."""

    FULL = "Full"
    NO_TIME_ATTN = "NoTimeAttn"
    GOAL_CONDITIONED = "GoalConditioned"


class TaskId(str, Enum):
    """Sequential multi-step folding tasks."""

    DOUBLE_TRIANGLE = "DoubleTriangle"
    DOUBLE_STRAIGHT = "DoubleStraight"
    ALL_CORNERS_INWARD = "AllCornersInward"
    CORNERS_EDGES_INWARD = "CornersEdgesInward"


MODEL_PRESETS: Dict[str, Dict[str, Any]] = {
    "tiny": {
        "H": 32,
        "W": 32,
        "P": 16,
        "D": 16,
        "L": 2,
        "F": 2,
        "heads": 2,
        "mlp_ratio": 2,
        "decoder_channels": [8, 8, 8, 8, 1],
    },
    "desk": {"H": 64, "W": 64, "P": 16, "D": 128, "L": 4, "F": 5},
    "large": {"H": 224, "W": 224, "P": 16, "D": 256, "L": 8, "F": 5},
}

TRAIN_PRESETS: Dict[str, Dict[str, Any]] = {
    "desk": {"batch_size": 32, "lr": 1e-4, "pretrain_epochs": 8},
    "large": {
        "batch_size": 32,
        "lr": 1e-4,
        "pretrain_epochs": 20,
        "finetune_epochs": 20,
    },
    "overfit": {
        "batch_size": 20,
        "lr": 1e-4,
        "max_samples": 20,
        "max_steps": 3000,
        "pretrain_epochs": 3000,
        "finetune_epochs": 0,
    },
}


def _apply_preset(
    data: Any, presets: Dict[str, Dict[str, Any]]
) -> Any:
    if isinstance(data, dict) and data.get("preset") in presets:
        merged = dict(presets[data["preset"]])
        merged.update(data)
        return merged
    return data


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_default=True)


class ModelSettings(_Section):
    """Network shape (the ModelConfig of the policy)."""

    preset: Optional[Literal["tiny", "desk", "large"]] = None
    H: int = Field(default=64, ge=1)
    W: int = Field(default=64, ge=1)
    P: int = Field(default=16, ge=1)
    D: int = Field(default=128, ge=1)
    L: int = Field(default=4, ge=1)
    F: int = Field(default=5, ge=1)
    heads: int = Field(default=4, ge=1)
    mlp_ratio: int = Field(default=4, ge=1)
    variant: Variant = Variant.FULL
    decoder_channels: List[int] = Field(
        default_factory=lambda: [256, 256, 128, 128, 1]
    )
    cross_norm: Literal["post", "pre"] = "post"
    init_std: float = Field(default=0.02, gt=0)
    # starting heatmap value; the output bias is its logit
    heatmap_prior: float = Field(default=0.006, gt=0, lt=1)
    depth_offset: float = Field(default=1.0, gt=0)
    input_scale: float = Field(default=100.0, gt=0)
    dtype: Literal["float32", "float64"] = "float32"

    @model_validator(mode="before")
    @classmethod
    def _fill_preset(cls, data: Any) -> Any:
        return _apply_preset(data, MODEL_PRESETS)

    @model_validator(mode="after")
    def _check_shape(self) -> "ModelSettings":
        if self.H % self.P or self.W % self.P:
            raise ValueError(
                f"H={self.H} and W={self.W} must be divisible by P={self.P}"
            )
        if self.D % self.heads:
            raise ValueError(
                f"D={self.D} must be divisible by heads={self.heads}"
            )
        upsamples = math.log2(self.P)
        if self.P < 2 or upsamples != int(upsamples):
            raise ValueError(f"P={self.P} must be a power of two")
        if len(self.decoder_channels) != int(upsamples) + 1:
            raise ValueError(
                f"P={self.P} needs {int(upsamples) + 1} decoder convolutions "
                f"(one per x2 upsample plus the output layer), got "
                f"{len(self.decoder_channels)}"
            )
        if self.decoder_channels[-1] != 1 or min(self.decoder_channels) < 1:
            raise ValueError(
                "decoder_channels must end with a 1-channel layer"
            )
        if self.variant is Variant.GOAL_CONDITIONED:
            self.F = 1
        return self

    @property
    def grid(self) -> tuple:
        """Patch grid size (rows, cols)."""
        return self.H // self.P, self.W // self.P

    @property
    def num_patches(self) -> int:
        rows, cols = self.grid
        return rows * cols

    @property
    def frames(self) -> int:
        """Frames per input stack: the observation plus F sub-goals."""
        return self.F + 1


class SimSettings(_Section):
    """Cloth simulator, camera and pick-and-place primitive."""

    grid_rows: int = Field(default=25, ge=2)
    grid_cols: int = Field(default=25, ge=2)
    particle_radius: float = Field(default=0.0025, gt=0)
    extent: float = Field(default=0.6, gt=0)
    camera_height: float = Field(default=1.0, gt=0)
    lift_height: float = Field(default=0.06, gt=0)
    n_waypoints: int = Field(default=20, ge=1)
    iterations: int = Field(default=40, ge=1)
    settle_iterations: int = Field(default=120, ge=1)
    gravity: float = Field(default=9.8, ge=0)
    dt: float = Field(default=0.01, gt=0)
    grasp_radius: float = Field(default=1.5, gt=0)
    stretch_tol: float = Field(default=0.05, gt=0)
    contact_mobility: float = Field(default=0.0, ge=0, le=1)
    relax_rounds: int = Field(default=20, ge=0)
    splat_radius: Optional[float] = Field(default=None, gt=0)

    @property
    def layer_thickness(self) -> float:
        return 2.0 * self.particle_radius

    @property
    def gravity_step(self) -> float:
        """Downward displacement applied to free particles per iteration."""
        return self.gravity * self.dt * self.dt


class DataSettings(_Section):
    """Random trajectories, demonstrations and sample construction."""

    root: Optional[str] = None
    random_trajectories: int = Field(default=200, ge=0)
    trajectory_length: int = Field(default=8, ge=1)
    K: int = Field(default=4, ge=1)
    demos_per_task: int = Field(default=20, ge=0)
    tasks: List[TaskId] = Field(default_factory=lambda: list(TaskId))
    base_seed: int = 0
    side_range: List[float] = Field(
        default_factory=lambda: [0.3125, 0.36875], min_length=2, max_length=2
    )
    rect_probability: float = Field(default=0.5, ge=0, le=1)
    rect_aspect: float = Field(default=0.8, gt=0, le=1)
    rotations_deg: List[float] = Field(
        default_factory=lambda: [0.0, 30.0, 45.0, 60.0]
    )
    demo_size_jitter: float = Field(default=0.05, ge=0)
    corner_bias: float = Field(default=0.8, ge=0, le=1)
    corner_jitter_px: int = Field(default=2, ge=0)
    displacement_range: List[float] = Field(
        default_factory=lambda: [0.1, 0.7], min_length=2, max_length=2
    )
    sigma: Optional[float] = Field(default=None, gt=0)


class TrainSettings(_Section):
    """Pretraining and fine-tuning schedule."""

    preset: Optional[Literal["desk", "large", "overfit"]] = None
    batch_size: int = Field(default=32, ge=1)
    lr: float = Field(default=1e-4, gt=0)
    pretrain_epochs: int = Field(default=8, ge=0)
    finetune_epochs: int = Field(default=4, ge=0)
    max_steps: Optional[int] = Field(default=None, ge=0)
    max_samples: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    random_dataset: Optional[str] = None
    demo_datasets: List[str] = Field(default_factory=list)
    checkpoint: Optional[str] = None
    log_every: int = Field(default=10, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _fill_preset(cls, data: Any) -> Any:
        return _apply_preset(data, TRAIN_PRESETS)


class EvalSettings(_Section):
    """Evaluation protocol: tasks and cloth-configuration grid."""

    grid: Literal["desk", "fine", "real"] = "desk"
    tasks: List[TaskId] = Field(
        default_factory=lambda: [
            TaskId.DOUBLE_TRIANGLE,
            TaskId.ALL_CORNERS_INWARD,
        ]
    )
    size_factors: List[float] = Field(
        default_factory=lambda: [0.9, 1.0, 1.1]
    )
    rotations_deg: List[float] = Field(
        default_factory=lambda: [0.0, 30.0, 45.0]
    )
    square_side: float = Field(default=0.34375, gt=0)
    rect_size: List[float] = Field(
        default_factory=lambda: [0.34375, 0.275], min_length=2, max_length=2
    )
    checkpoint: Optional[str] = None
    seed: int = 0
    write_frames: bool = True


class RunConfig(_Section):
    """The complete configuration document."""

    model: ModelSettings = Field(default_factory=ModelSettings)
    sim: SimSettings = Field(default_factory=SimSettings)
    data: DataSettings = Field(default_factory=DataSettings)
    train: TrainSettings = Field(default_factory=TrainSettings)
    eval: EvalSettings = Field(default_factory=EvalSettings)
