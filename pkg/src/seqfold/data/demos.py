"""Scripted demonstrators for the four sequential folding tasks.

Every script picks and places at ground-truth particle positions,
re-reading the cloth after each action. Pick orders:

* DoubleTriangle: top-left corner onto bottom-right, then top-right
  onto bottom-left.
* DoubleStraight: top-left onto bottom-left and top-right onto
  bottom-right (top half onto bottom half), then the midpoint of the
  folded edge onto the middle of the opposite edge.
* AllCornersInward: top-left, top-right, bottom-right, bottom-left,
  each onto the initial cloth center.
* CornersEdgesInward: top-left and bottom-right onto the center, then
  top-right and bottom-left.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from seqfold.data.trajectory import Trajectory
from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.settings import SimSettings, TaskId
from seqfold.sim.camera import Camera
from seqfold.sim.cloth import ClothState, init_cloth
from seqfold.sim.primitive import PickPlaceResult, execute_pick_place
from seqfold.sim.render import render_depth
from seqfold.utils.exceptions import ConfigError

logger = logging.getLogger(__name__)

SQUARE_SIDE = 0.34375
RECT_SIZE = (0.34375, 0.275)

# Step planner: (state, step, initial center xy) -> (pick xy, place xy)
Planner = Callable[
    [ClothState, int, np.ndarray], Tuple[np.ndarray, np.ndarray]
]


def _corner(state: ClothState, which: str) -> np.ndarray:
    last = state.num_particles - 1
    index = {
        "TL": 0,
        "TR": state.cols - 1,
        "BL": last - state.cols + 1,
        "BR": last,
    }[which]
    return state.positions[index, :2]


def _particle(state: ClothState, row: int, col: int) -> np.ndarray:
    return state.positions[row * state.cols + col, :2]


def _double_triangle(
    state: ClothState, step: int, center: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    pick, place = [("TL", "BR"), ("TR", "BL")][step]
    return _corner(state, pick), _corner(state, place)


def _double_straight(
    state: ClothState, step: int, center: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    if step < 2:
        pick, place = [("TL", "BL"), ("TR", "BR")][step]
        return _corner(state, pick), _corner(state, place)
    # the first two folds leave the crease along the middle row
    row, col = (state.rows - 1) // 2, (state.cols - 1) // 2
    return (
        _particle(state, row, col),
        _particle(state, state.rows - 1, col),
    )


def _all_corners(
    state: ClothState, step: int, center: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    corner = ["TL", "TR", "BR", "BL"][step]
    return _corner(state, corner), center


def _corners_edges(
    state: ClothState, step: int, center: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    corner = ["TL", "BR", "TR", "BL"][step]
    return _corner(state, corner), center


@dataclass(frozen=True)
class TaskScript:
    """A task id with its action count and step planner."""

    task: TaskId
    num_actions: int
    planner: Planner
    rectangular: bool = False

    def canonical_spec(
        self,
        sim: SimSettings,
        size_factor: float = 1.0,
        rotation_deg: float = 0.0,
        square_side: float = SQUARE_SIDE,
        rect_size: Tuple[float, float] = RECT_SIZE,
        height_factor: Optional[float] = None,
    ) -> ClothSpec:
        """Cloth the task is demonstrated on, scaled and rotated.

        ``height_factor`` replaces ``size_factor`` for the height of
        rectangular cloth; square cloth ignores it.
        """
        width, height = (
            rect_size if self.rectangular else (square_side, square_side)
        )
        if not self.rectangular or height_factor is None:
            height_factor = size_factor
        return ClothSpec(
            rows=sim.grid_rows,
            cols=sim.grid_cols,
            width=width * size_factor,
            height=height * height_factor,
            rotation=math.radians(rotation_deg),
        )

    def plan(
        self, state: ClothState, step: int, center: np.ndarray, camera: Camera
    ) -> PickPlaceAction:
        pick_xy, place_xy = self.planner(state, step, center)
        pick, _ = camera.world_to_pixel(tuple(pick_xy))
        place, _ = camera.world_to_pixel(tuple(place_xy))
        return PickPlaceAction(pick=pick, place=place)


TaskLike = Union[TaskScript, TaskId, str]

TASK_SCRIPTS: Dict[TaskId, TaskScript] = {
    TaskId.DOUBLE_TRIANGLE: TaskScript(
        TaskId.DOUBLE_TRIANGLE, 2, _double_triangle
    ),
    TaskId.DOUBLE_STRAIGHT: TaskScript(
        TaskId.DOUBLE_STRAIGHT, 3, _double_straight, rectangular=True
    ),
    TaskId.ALL_CORNERS_INWARD: TaskScript(
        TaskId.ALL_CORNERS_INWARD, 4, _all_corners
    ),
    TaskId.CORNERS_EDGES_INWARD: TaskScript(
        TaskId.CORNERS_EDGES_INWARD, 4, _corners_edges
    ),
}


def get_task_script(task: Union[TaskId, str]) -> TaskScript:
    """Look up a task script by id.

    Raises:
        ConfigError: If the task id is unknown
    """
    try:
        return TASK_SCRIPTS[TaskId(task)]
    except ValueError:
        raise ConfigError(
            f"Unknown task: {task}",
            detail=f"expected one of {[t.value for t in TaskId]}",
        )


def _run_script(
    script: TaskScript, state: ClothState, camera: Camera, sim: SimSettings
) -> Iterator[Tuple[PickPlaceAction, PickPlaceResult]]:
    center = state.positions[:, :2].mean(axis=0)
    for step in range(script.num_actions):
        action = script.plan(state, step, center, camera)
        result = execute_pick_place(state, action, camera, sim)
        if not result.grasped:
            logger.warning(
                f"{script.task.value} step {step} grasped nothing"
            )
        state = result.state
        yield action, result


def scripted_demo(
    task: TaskLike,
    state: ClothState,
    camera: Camera,
    sim: SimSettings,
) -> List[PickPlaceAction]:
    """Actions a demonstrator takes from ``state`` for ``task``."""
    script = task if isinstance(task, TaskScript) else get_task_script(task)
    return [
        action for action, _ in _run_script(script, state, camera, sim)
    ]


def collect_demo(
    task: TaskLike,
    spec: ClothSpec,
    camera: Camera,
    sim: SimSettings,
    seed: int = 0,
) -> Trajectory:
    """Run the demonstrator from a flat cloth and record the trajectory."""
    script = task if isinstance(task, TaskScript) else get_task_script(task)
    state = init_cloth(spec, sim.particle_radius)
    observations = [render_depth(state, camera, sim.splat_radius)]
    states = [state.positions.copy()]
    actions: List[PickPlaceAction] = []
    executed: List[bool] = []
    final = state
    for action, result in _run_script(script, state, camera, sim):
        final = result.state
        actions.append(action)
        executed.append(result.grasped)
        observations.append(render_depth(final, camera, sim.splat_radius))
        states.append(final.positions.copy())
    logger.debug(
        f"{script.task.value} demo finished with {len(actions)} actions"
    )
    return Trajectory(
        spec=spec,
        observations=observations,
        actions=actions,
        states=states,
        executed=executed,
        seed=seed,
        final_state=final,
    )

