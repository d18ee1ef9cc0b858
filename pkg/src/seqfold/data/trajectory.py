"""Trajectory collection, training samples and target heatmaps."""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.settings import SimSettings
from seqfold.network.model import HeatmapPair
from seqfold.network.patches import pad_subgoals
from seqfold.sim.camera import Camera
from seqfold.sim.cloth import ClothState, init_cloth
from seqfold.sim.primitive import execute_pick_place
from seqfold.sim.render import render_depth
from seqfold.utils.exceptions import DimensionError

logger = logging.getLogger(__name__)

HEATMAP_FLOOR = 1e-4

ActionSource = Callable[[ClothState, np.random.Generator], PickPlaceAction]


@dataclass
class Trajectory:
    """Observations o_0..o_M, actions a_1..a_M and particle snapshots."""

    spec: ClothSpec
    observations: List[np.ndarray]
    actions: List[PickPlaceAction]
    states: List[np.ndarray]  # (n, 3) particle positions per observation
    executed: List[bool] = field(default_factory=list)
    seed: int = 0
    final_state: Optional[ClothState] = None  # not persisted

    def __post_init__(self) -> None:
        if len(self.observations) != len(self.actions) + 1:
            raise DimensionError(
                "A trajectory needs one more observation than actions",
                detail=(
                    f"{len(self.observations)} observations, "
                    f"{len(self.actions)} actions"
                ),
            )
        if not self.executed:
            self.executed = [True] * len(self.actions)

    @property
    def num_actions(self) -> int:
        return len(self.actions)


def collect_trajectory(
    policy: ActionSource,
    spec: ClothSpec,
    length: int,
    rng: np.random.Generator,
    camera: Camera,
    sim: SimSettings,
) -> Trajectory:
    """Run ``length`` actions from a flat cloth, rendering before/after each.

    Actions that grasp nothing are kept as executed no-ops.
    """
    if length < 1:
        raise DimensionError(f"Trajectory length must be >= 1, got {length}")
    state = init_cloth(spec, sim.particle_radius)
    observations = [render_depth(state, camera, sim.splat_radius)]
    states = [state.positions.copy()]
    actions: List[PickPlaceAction] = []
    executed: List[bool] = []
    for step in range(length):
        action = policy(state, rng)
        result = execute_pick_place(state, action, camera, sim)
        if not result.grasped:
            logger.warning(f"Step {step}: no grasp, recorded as a no-op")
        state = result.state
        actions.append(action)
        executed.append(result.grasped)
        observations.append(render_depth(state, camera, sim.splat_radius))
        states.append(state.positions.copy())
    return Trajectory(
        spec=spec,
        observations=observations,
        actions=actions,
        states=states,
        executed=executed,
        final_state=state,
    )


def default_sigma(height: int) -> float:
    """Heatmap width in pixels: H / 32."""
    return height / 32.0


def gaussian_map(
    pixel: Sequence[int], height: int, width: int, sigma: float
) -> np.ndarray:
    """Unnormalized Gaussian with peak 1 at ``pixel``, tiny values zeroed."""
    rows = np.arange(height)[:, None] - pixel[0]
    cols = np.arange(width)[None, :] - pixel[1]
    values = np.exp(-(rows**2 + cols**2) / (2.0 * sigma**2))
    values[values < HEATMAP_FLOOR] = 0.0
    return values


def gt_heatmap(
    action: PickPlaceAction,
    height: int,
    width: int,
    sigma: Optional[float] = None,
) -> HeatmapPair:
    """Target pick and place maps for one action."""
    for pixel in (action.pick, action.place):
        if not (0 <= pixel[0] < height and 0 <= pixel[1] < width):
            raise DimensionError(
                f"Action pixel {tuple(pixel)} outside {height}x{width}"
            )
    sigma = sigma or default_sigma(height)
    return HeatmapPair(
        pick=gaussian_map(action.pick, height, width, sigma),
        place=gaussian_map(action.place, height, width, sigma),
    )


@dataclass
class Sample:
    """One supervised example of a sub-trajectory.

    ``current`` is o_{i+j}, ``subgoals`` are o_i..o_{i+K} and the target
    is a_{i+j+1}. ``step_index`` is j.
    """

    current: np.ndarray
    subgoals: List[np.ndarray]
    target_action: PickPlaceAction
    step_index: int
    start_index: int = 0
    sigma: Optional[float] = None

    @property
    def next_frame(self) -> np.ndarray:
        """o_{i+j+1}, the single goal used by the goal-conditioned variant."""
        return self.subgoals[self.step_index + 1]

    @property
    def target_heatmaps(self) -> HeatmapPair:
        height, width = self.current.shape
        return gt_heatmap(self.target_action, height, width, self.sigma)


def split_samples(
    traj: Trajectory, K: int, sigma: Optional[float] = None
) -> List[Sample]:
    """All (M - K + 1) * K samples of the length-K sub-trajectories."""
    M = traj.num_actions
    if M < K:
        logger.warning(
            f"Trajectory with {M} actions is shorter than K={K}; no samples"
        )
        return []
    samples = []
    for start in range(M - K + 1):
        subgoals = traj.observations[start : start + K + 1]
        for j in range(K):
            samples.append(
                Sample(
                    current=traj.observations[start + j],
                    subgoals=list(subgoals),
                    target_action=traj.actions[start + j],
                    step_index=j,
                    start_index=start,
                    sigma=sigma,
                )
            )
    return samples


def demo_samples(
    traj: Trajectory, K: int, sigma: Optional[float] = None
) -> List[Sample]:
    """Samples from a demonstration, padding demos shorter than K.

    A short demo becomes one sub-trajectory whose sub-goal list repeats
    the final frame up to K + 1 frames.
    """
    if traj.num_actions >= K:
        return split_samples(traj, K, sigma)
    subgoals = pad_subgoals(traj.observations, K + 1)
    return [
        Sample(
            current=traj.observations[j],
            subgoals=list(subgoals),
            target_action=traj.actions[j],
            step_index=j,
            sigma=sigma,
        )
        for j in range(traj.num_actions)
    ]
