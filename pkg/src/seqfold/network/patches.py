"""Patch decomposition and frame-stack assembly."""

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from seqfold.utils.exceptions import ConfigError, DimensionError


def decompose_patches(image: np.ndarray, patch: int) -> np.ndarray:
    """Split an H x W image into row-major, row-major-flattened patches.

    Leading axes are carried through, so a (..., H, W) array gives
    (..., N_p, P*P).

    Raises:
        ConfigError: If H or W is not divisible by the patch size
    """
    *lead, height, width = image.shape
    if height % patch or width % patch:
        raise ConfigError(
            "Image size not divisible by patch size",
            detail=f"{height}x{width} with P={patch}",
        )
    rows, cols = height // patch, width // patch
    blocks = image.reshape(*lead, rows, patch, cols, patch)
    n = len(lead)
    blocks = blocks.transpose(
        *range(n), n, n + 2, n + 1, n + 3
    )  # (..., rows, cols, P, P)
    return blocks.reshape(*lead, rows * cols, patch * patch)


def reassemble_patches(
    patches: np.ndarray, height: int, width: int
) -> np.ndarray:
    """Inverse of :func:`decompose_patches`."""
    *lead, count, area = patches.shape
    patch = int(round(np.sqrt(area)))
    rows, cols = height // patch, width // patch
    if patch * patch != area or rows * cols != count:
        raise DimensionError(
            "Patches do not tile the image",
            detail=f"{patches.shape} into {height}x{width}",
        )
    n = len(lead)
    blocks = patches.reshape(*lead, rows, cols, patch, patch)
    blocks = blocks.transpose(*range(n), n, n + 2, n + 1, n + 3)
    return blocks.reshape(*lead, height, width)


def pad_subgoals(frames: Sequence[np.ndarray], count: int) -> List[np.ndarray]:
    """Fit a sub-goal sequence to exactly ``count`` frames.

    Short sequences repeat their final (goal) frame; long ones keep the
    first ``count - 1`` frames and the goal, so the last frame is always
    the goal.
    """
    if not frames:
        raise DimensionError("Sub-goal sequence is empty")
    frames = list(frames)
    if len(frames) >= count:
        return frames[: count - 1] + [frames[-1]]
    return frames + [frames[-1]] * (count - len(frames))


@dataclass
class FrameStack:
    """The observation followed by F sub-goal depth images (meters)."""

    frames: np.ndarray  # (F + 1, H, W)

    def __post_init__(self) -> None:
        if self.frames.ndim != 3 or self.frames.shape[0] < 2:
            raise DimensionError(
                "FrameStack needs (F + 1, H, W) with F >= 1",
                detail=str(self.frames.shape),
            )
        if not np.all(np.isfinite(self.frames)):
            raise DimensionError("FrameStack contains non-finite depth")

    @classmethod
    def build(
        cls,
        observation: np.ndarray,
        subgoals: Sequence[np.ndarray],
        num_subgoals: int,
    ) -> "FrameStack":
        """Stack an observation with sub-goals padded to ``num_subgoals``."""
        padded = pad_subgoals(subgoals, num_subgoals)
        return cls(np.stack([observation, *padded]).astype(np.float64))
