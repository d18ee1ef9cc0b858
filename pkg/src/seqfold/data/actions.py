"""Random cloth configurations and corner-biased random actions."""

import logging
import math
from typing import Optional

import numpy as np

from seqfold.models.cloth import ClothSpec, Pixel, PickPlaceAction
from seqfold.models.settings import DataSettings, SimSettings
from seqfold.sim.camera import Camera
from seqfold.sim.cloth import ClothState
from seqfold.sim.render import render_mask
from seqfold.utils.exceptions import SimulationError


def random_spec(
    data: DataSettings, sim: SimSettings, rng: np.random.Generator
) -> ClothSpec:
    """Draw a cloth size and rotation from the configured ranges."""
    low, high = data.side_range
    width = float(rng.uniform(low, high))
    height = width
    if rng.random() < data.rect_probability:
        height = width * data.rect_aspect
    rotation = math.radians(float(rng.choice(data.rotations_deg)))
    return ClothSpec(
        rows=sim.grid_rows,
        cols=sim.grid_cols,
        width=width,
        height=height,
        rotation=rotation,
    )


class RandomActionSampler:
    """Random pick-and-place actions biased towards cloth corners.

    With probability ``corner_bias`` the pick is the pixel of a random
    corner particle, jittered by up to ``corner_jitter_px`` and pulled
    back onto the cloth mask if the jitter left it. Otherwise the pick is
    uniform over the mask. The place pixel is the pick moved in a uniform
    direction by a fraction of the cloth diagonal, clamped to the image.
    """

    def __init__(
        self,
        camera: Camera,
        data: Optional[DataSettings] = None,
        splat_radius: Optional[float] = None,
    ) -> None:
        self.logger = logging.getLogger(__name__)
        self.camera = camera
        self.data = data or DataSettings()
        self.splat_radius = splat_radius
        self.corner_picks = 0
        self.total = 0

    @property
    def corner_fraction(self) -> float:
        return self.corner_picks / self.total if self.total else 0.0

    def __call__(
        self, state: ClothState, rng: np.random.Generator
    ) -> PickPlaceAction:
        mask = render_mask(state, self.camera, self.splat_radius)
        cloth = np.argwhere(mask)
        if cloth.size == 0:
            raise SimulationError("Cloth is not visible to the camera")

        self.total += 1
        if rng.random() < self.data.corner_bias:
            self.corner_picks += 1
            pick = self._corner_pick(state, mask, cloth, rng)
        else:
            row, col = cloth[rng.integers(len(cloth))]
            pick = (int(row), int(col))
        return PickPlaceAction(pick=pick, place=self._place(state, pick, rng))

    def _corner_pick(
        self,
        state: ClothState,
        mask: np.ndarray,
        cloth: np.ndarray,
        rng: np.random.Generator,
    ) -> Pixel:
        corner = int(rng.choice(state.corners))
        (row, col), _ = self.camera.world_to_pixel(
            tuple(state.positions[corner, :2])
        )
        jitter = self.data.corner_jitter_px
        row += int(rng.integers(-jitter, jitter + 1))
        col += int(rng.integers(-jitter, jitter + 1))
        row = min(max(row, 0), self.camera.H - 1)
        col = min(max(col, 0), self.camera.W - 1)
        if mask[row, col]:
            return row, col
        nearest = cloth[np.argmin(np.sum((cloth - [row, col]) ** 2, axis=1))]
        return int(nearest[0]), int(nearest[1])

    def _place(
        self, state: ClothState, pick: Pixel, rng: np.random.Generator
    ) -> Pixel:
        low, high = self.data.displacement_range
        diagonal_px = state.topology.diagonal / self.camera.pixel_width
        distance = rng.uniform(low, high) * diagonal_px
        angle = rng.uniform(0.0, 2.0 * math.pi)
        row = int(round(pick[0] + distance * math.sin(angle)))
        col = int(round(pick[1] + distance * math.cos(angle)))
        return (
            min(max(row, 0), self.camera.H - 1),
            min(max(col, 0), self.camera.W - 1),
        )


def random_action(
    state: ClothState,
    camera: Camera,
    rng: np.random.Generator,
    data: Optional[DataSettings] = None,
) -> PickPlaceAction:
    """Draw one corner-biased random action for ``state``."""
    return RandomActionSampler(camera, data)(state, rng)
