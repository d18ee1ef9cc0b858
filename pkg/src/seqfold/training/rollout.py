"""Closed-loop execution of a policy conditioned on a demonstration."""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.settings import SimSettings, Variant
from seqfold.network.model import FoldPolicyNet
from seqfold.network.patches import FrameStack
from seqfold.sim.camera import Camera
from seqfold.sim.cloth import ClothState, init_cloth
from seqfold.sim.primitive import execute_pick_place
from seqfold.sim.render import render_depth
from seqfold.utils.exceptions import DimensionError

logger = logging.getLogger(__name__)


@dataclass
class RolloutResult:
    """Final cloth, the actions taken and a frame per executed step."""

    final_state: ClothState
    actions: List[PickPlaceAction] = field(default_factory=list)
    executed: List[bool] = field(default_factory=list)
    frames: List[np.ndarray] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return int(sum(self.executed))


def run_policy(
    model: FoldPolicyNet,
    demo: Sequence[np.ndarray],
    spec: ClothSpec,
    camera: Camera,
    sim: SimSettings,
) -> RolloutResult:
    """Fold a flat cloth of ``spec`` by following ``demo``.

    The demo holds N + 1 depth frames for an N-action task, and the
    policy acts exactly N times. Each step feeds a freshly rendered
    observation; the goal-conditioned variant sees only the next demo
    frame, the others the whole demo fitted to F frames.
    """
    if len(demo) < 2:
        raise DimensionError(
            "A demonstration needs at least two frames",
            detail=f"got {len(demo)}",
        )
    config = model.config
    state = init_cloth(spec, sim.particle_radius)
    result = RolloutResult(final_state=state)
    for step in range(len(demo) - 1):
        observation = render_depth(state, camera, sim.splat_radius)
        if config.variant is Variant.GOAL_CONDITIONED:
            stack = FrameStack.build(observation, [demo[step + 1]], 1)
        else:
            stack = FrameStack.build(observation, demo, config.F)
        action = model.act(stack)
        outcome = execute_pick_place(state, action, camera, sim)
        result.actions.append(action)
        result.executed.append(outcome.grasped)
        if not outcome.grasped:
            logger.info(f"Rollout step {step} skipped: nothing grasped")
            continue
        state = outcome.state
        result.frames.append(render_depth(state, camera, sim.splat_radius))
    result.final_state = state
    return result
