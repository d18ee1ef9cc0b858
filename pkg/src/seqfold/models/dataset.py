"""Dataset manifest models."""

from typing import List, Optional

from pydantic import BaseModel, Field

from seqfold.models.cloth import ClothSpec

DATASET_VERSION = 1


class FileEntry(BaseModel):
    """A file inside a trajectory directory and its byte length."""

    path: str = Field(..., description="Path relative to the dataset root")
    bytes: int = Field(..., ge=0)


class TrajectoryEntry(BaseModel):
    """Index record for one stored trajectory."""

    index: int
    directory: str
    seed: int
    num_actions: int
    num_particles: int
    files: List[FileEntry]
    noops: List[int] = Field(
        default_factory=list, description="Actions that grasped nothing"
    )


class DatasetManifest(BaseModel):
    """Top-level description of a stored dataset."""

    version: int = DATASET_VERSION
    kind: str = Field(..., description="'random' or a task id")
    seed: int
    image_size: List[int]
    camera_height: float
    extent: float
    counts: dict
    spec_ranges: dict
    trajectories: List[TrajectoryEntry] = Field(default_factory=list)
    task: Optional[str] = None
    example_spec: Optional[ClothSpec] = None
