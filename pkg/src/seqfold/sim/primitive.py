"""Pick-and-place primitive on the particle cloth.

The gripper grasps the top layer under the pick pixel, lifts, carries
the grasp along the straight pick-to-place segment, lowers and lets go.
Particles on the pick side of the fold line turn over it in step with
the gripper, since the particle model has no bending stiffness to keep
a flap flat. The rest of the cloth follows through constraint
projection after every waypoint, then settles once released.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from seqfold.models.cloth import Pixel, PickPlaceAction
from seqfold.models.settings import SimSettings
from seqfold.sim.camera import Camera
from seqfold.sim.cloth import ClothState, assign_layers, pbd_solve, settle
from seqfold.utils.exceptions import NoGraspError, SimulationError

logger = logging.getLogger(__name__)

VERTICAL_STEPS = 5


@dataclass
class PickPlaceResult:
    """Outcome of one primitive call."""

    state: ClothState
    grasped: bool
    residual: float = 0.0
    num_grasped: int = 0


@dataclass
class Carry:
    """Particles moved along with the gripper.

    A fold turns ``indices`` over the fold line through ``origin``, a
    half turn over the carry. Without a fold line the particles slide
    by the gripper displacement instead.
    """

    indices: np.ndarray
    start: np.ndarray  # (k, 3) positions at the grasp
    displacement: np.ndarray  # xy
    origin: Optional[np.ndarray] = None  # xy point on the fold line
    normal: Optional[np.ndarray] = None  # unit xy, toward the pick side
    axis_height: float = 0.0

    @property
    def is_fold(self) -> bool:
        return self.normal is not None

    def positions(self, progress: float) -> np.ndarray:
        """Positions once the gripper is ``progress`` along the carry."""
        moved = self.start.copy()
        if self.normal is None:
            moved[:, :2] += progress * self.displacement
            return moved
        angle = np.pi * progress
        side = (self.start[:, :2] - self.origin) @ self.normal
        rise = self.start[:, 2] - self.axis_height
        new_side = side * np.cos(angle) - rise * np.sin(angle)
        new_rise = side * np.sin(angle) + rise * np.cos(angle)
        moved[:, :2] += (new_side - side)[:, None] * self.normal
        moved[:, 2] = self.axis_height + np.maximum(new_rise, 0.0)
        return moved


def carry_plan(
    state: ClothState,
    handle: np.ndarray,
    displacement: np.ndarray,
    sim: SimSettings,
) -> Optional[Carry]:
    """Particles the gripper takes along when ``handle`` is moved.

    The fold line is the perpendicular bisector of the handle and its
    target. Every particle on the handle's side of it is folded over.
    When no particle lies beyond the line the whole cloth is dragged.

    Returns:
        The carry, or None for a zero displacement
    """
    distance = float(np.linalg.norm(displacement))
    if distance <= 1e-9:
        return None
    normal = -np.asarray(displacement) / distance
    origin = np.asarray(handle) + np.asarray(displacement) / 2.0
    side = (state.positions[:, :2] - origin) @ normal
    indices = np.flatnonzero(side > 0.0)
    start = state.positions[indices].copy()
    if indices.size == state.num_particles:
        return Carry(indices, start, np.asarray(displacement))
    return Carry(
        indices,
        start,
        np.asarray(displacement),
        origin=origin,
        normal=normal,
        axis_height=sim.particle_radius,
    )


def grasp_select(
    state: ClothState, pick: Pixel, camera: Camera, radius: float
) -> np.ndarray:
    """Indices of the top-layer particles under the pick pixel.

    Args:
        state: Current cloth
        pick: Pick pixel (row, col)
        camera: Camera defining the pixel-to-world mapping
        radius: Grasp radius in meters

    Returns:
        np.ndarray: Particle indices within ``radius`` of the pick point
            in xy and within one particle radius of the highest of them

    Raises:
        NoGraspError: If no particle lies under the gripper
    """
    point = np.asarray(camera.pixel_to_world(pick))
    dist = np.linalg.norm(state.positions[:, :2] - point, axis=1)
    disk = np.flatnonzero(dist <= radius)
    if disk.size == 0:
        raise NoGraspError(
            f"Nothing to grasp at pixel {tuple(pick)}",
            detail=f"no particle within {radius * 1000:.1f} mm",
        )
    z = state.positions[disk, 2]
    return disk[z >= z.max() - state.radius]


def _check_pixel(pixel: Pixel, camera: Camera, role: str) -> None:
    row, col = pixel
    if not (0 <= row < camera.H and 0 <= col < camera.W):
        raise SimulationError(
            f"{role} pixel {tuple(pixel)} is outside the "
            f"{camera.H}x{camera.W} image"
        )


def gripper_path(
    start_z: float, displacement: np.ndarray, sim: SimSettings
) -> List[np.ndarray]:
    """Offsets of the grasped set at each waypoint (trapezoid profile).

    Lift by ``sim.lift_height``, translate by ``displacement`` (xy) in
    ``sim.n_waypoints`` steps, then lower until the grasp rests one layer
    above the table.
    """
    lower_to = sim.particle_radius + sim.layer_thickness - start_z
    waypoints = []
    for t in np.linspace(0.0, 1.0, VERTICAL_STEPS + 1)[1:]:
        waypoints.append(np.array([0.0, 0.0, t * sim.lift_height]))
    for t in np.linspace(0.0, 1.0, sim.n_waypoints + 1)[1:]:
        xy = t * displacement
        waypoints.append(np.array([xy[0], xy[1], sim.lift_height]))
    for t in np.linspace(0.0, 1.0, VERTICAL_STEPS + 1)[1:]:
        z = (1.0 - t) * sim.lift_height + t * lower_to
        waypoints.append(np.array([displacement[0], displacement[1], z]))
    return waypoints


def execute_pick_place(
    state: ClothState,
    action: PickPlaceAction,
    camera: Camera,
    sim: SimSettings,
) -> PickPlaceResult:
    """Run one pick-and-place on a copy of ``state``.

    An empty grasp is not an error: the result carries the unchanged
    state with ``grasped=False``.

    Raises:
        SimulationError: If either pixel lies outside the image, or if
            the released cloth cannot be relaxed to the stretch
            tolerance
    """
    _check_pixel(action.pick, camera, "Pick")
    _check_pixel(action.place, camera, "Place")
    result = state.copy()
    grasp_radius = sim.grasp_radius * state.topology.spacing
    try:
        grasped = grasp_select(result, action.pick, camera, grasp_radius)
    except NoGraspError as e:
        logger.warning(f"Skipping action: {e.message}")
        return PickPlaceResult(state=result, grasped=False)

    pick_xy = np.asarray(camera.pixel_to_world(action.pick))
    place_xy = np.asarray(camera.pixel_to_world(action.place))
    displacement = place_xy - pick_xy
    anchor = result.positions[grasped].copy()
    handle = anchor[
        np.argmin(np.linalg.norm(anchor[:, :2] - pick_xy, axis=1)), :2
    ]
    carry = carry_plan(result, handle, displacement, sim)
    pinned = grasped if carry is None else np.union1d(grasped, carry.indices)
    span = float(displacement @ displacement)
    start = result.positions[:, 2].copy()
    peak = start.copy()

    path = gripper_path(float(anchor[:, 2].max()), displacement, sim)
    for offset in path:
        if carry is not None:
            progress = float(offset[:2] @ displacement) / span
            result.positions[carry.indices] = carry.positions(progress)
        result.positions[grasped] = anchor + offset
        pbd_solve(result, pinned, sim.iterations, sim)
        np.maximum(peak, result.positions[:, 2], out=peak)

    lifted = peak - start > sim.layer_thickness
    assign_layers(result, lifted, state.topology.spacing)
    residual = settle(result, sim)
    logger.debug(
        f"Pick {action.pick} -> place {action.place}: grasped "
        f"{grasped.size}, carried "
        f"{0 if carry is None else carry.indices.size}, "
        f"lifted {int(lifted.sum())}, residual {residual:.4f}"
    )
    return PickPlaceResult(
        state=result,
        grasped=True,
        residual=residual,
        num_grasped=int(grasped.size),
    )
