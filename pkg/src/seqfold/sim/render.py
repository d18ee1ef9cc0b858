"""Top-down depth and mask rendering by splatting particles as disks."""

from typing import Optional, Tuple

import numpy as np

from seqfold.sim.camera import Camera
from seqfold.sim.cloth import ClothState

SPACING_SPLAT_FACTOR = 0.75


def splat_radius(state: ClothState, override: Optional[float] = None) -> float:
    """Disk radius in meters used for every particle.

    Defaults to the larger of the particle radius and three quarters of
    the grid spacing, so neighboring disks overlap on a flat cloth.
    """
    if override is not None:
        return float(override)
    return max(state.radius, SPACING_SPLAT_FACTOR * state.topology.spacing)


def _height_map(
    state: ClothState, camera: Camera, radius: float
) -> np.ndarray:
    """Max particle z per pixel, ``-inf`` where no disk lands."""
    heights = np.full((camera.H, camera.W), -np.inf)
    if state.num_particles == 0:
        return heights
    centers = camera.project(state.positions[:, :2])
    reach_r = int(np.ceil(radius / camera.pixel_height)) + 1
    reach_c = int(np.ceil(radius / camera.pixel_width)) + 1
    dr, dc = np.meshgrid(
        np.arange(-reach_r, reach_r + 1),
        np.arange(-reach_c, reach_c + 1),
        indexing="ij",
    )
    base = np.rint(centers).astype(np.int64)
    rows = base[:, 0, None] + dr.ravel()[None, :]
    cols = base[:, 1, None] + dc.ravel()[None, :]
    dist = np.hypot(
        (rows - centers[:, 0, None]) * camera.pixel_height,
        (cols - centers[:, 1, None]) * camera.pixel_width,
    )
    # The pixel under each particle center is always covered.
    hit = (dist <= radius) | ((dr.ravel() == 0) & (dc.ravel() == 0))[None]
    hit &= (rows >= 0) & (rows < camera.H) & (cols >= 0) & (cols < camera.W)
    z = np.broadcast_to(state.positions[:, 2, None], hit.shape)
    np.maximum.at(heights, (rows[hit], cols[hit]), z[hit])
    return heights


def render(
    state: ClothState, camera: Camera, radius: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Render depth (meters from the camera) and the cloth mask together."""
    heights = _height_map(state, camera, splat_radius(state, radius))
    mask = np.isfinite(heights)
    depth = np.where(mask, camera.height - heights, camera.height)
    return depth, mask


def render_depth(
    state: ClothState, camera: Camera, radius: Optional[float] = None
) -> np.ndarray:
    """Depth image (H, W); the empty table reads ``camera.height``."""
    return render(state, camera, radius)[0]


def render_mask(
    state: ClothState, camera: Camera, radius: Optional[float] = None
) -> np.ndarray:
    """Boolean (H, W) mask of pixels covered by at least one particle."""
    return render(state, camera, radius)[1]
