"""Top-down orthographic camera over a square workspace."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from seqfold.models.cloth import Pixel
from seqfold.models.settings import SimSettings


@dataclass(frozen=True)
class Camera:
    """Orthographic camera looking straight down at the table.

    Image row 0 is the +y edge of the workspace and column 0 the -x edge.
    """

    extent: float = 0.6
    height: float = 1.0
    H: int = 64
    W: int = 64
    center: Tuple[float, float] = (0.0, 0.0)

    @classmethod
    def from_settings(cls, sim: SimSettings, H: int, W: int) -> "Camera":
        return cls(extent=sim.extent, height=sim.camera_height, H=H, W=W)

    @property
    def pixel_width(self) -> float:
        return self.extent / self.W

    @property
    def pixel_height(self) -> float:
        return self.extent / self.H

    def pixel_to_world(self, pixel: Pixel) -> Tuple[float, float]:
        """World xy (meters) of a pixel center."""
        row, col = pixel
        x = self.center[0] - self.extent / 2 + (col + 0.5) * self.pixel_width
        y = self.center[1] + self.extent / 2 - (row + 0.5) * self.pixel_height
        return float(x), float(y)

    def world_to_pixel(self, xy: Tuple[float, float]) -> Tuple[Pixel, bool]:
        """Pixel containing a world point.

        Returns:
            The (row, col) pixel, clamped to the image, and whether the
            point was inside the view extent.
        """
        left = xy[0] - self.center[0] + self.extent / 2
        top = self.center[1] + self.extent / 2 - xy[1]
        col = int(np.floor(left / self.pixel_width))
        row = int(np.floor(top / self.pixel_height))
        inside = 0 <= row < self.H and 0 <= col < self.W
        row = min(max(row, 0), self.H - 1)
        col = min(max(col, 0), self.W - 1)
        return (row, col), inside

    def project(self, xy: np.ndarray) -> np.ndarray:
        """Continuous (row, col) image coordinates of world points (n, 2)."""
        cols = (xy[:, 0] - self.center[0] + self.extent / 2) / self.pixel_width
        top = self.center[1] + self.extent / 2 - xy[:, 1]
        rows = top / self.pixel_height
        return np.stack([rows - 0.5, cols - 0.5], axis=1)
