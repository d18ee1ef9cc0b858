"""Mean-particle-distance evaluation over a grid of cloth configurations.

Every configuration of a task is folded twice: once by the policy,
conditioned on the demonstration rendered from the canonical cloth, and
once by the scripted demonstrator on that same configuration. The two
final states are compared particle by particle.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from seqfold.data.demos import TaskScript, collect_demo, get_task_script
from seqfold.models.cloth import ClothSpec
from seqfold.models.report import EpisodeRow, EvalReport
from seqfold.models.settings import EvalSettings, RunConfig, TaskId
from seqfold.network.model import FoldPolicyNet
from seqfold.sim.camera import Camera
from seqfold.sim.cloth import init_cloth
from seqfold.sim.metrics import mean_particle_distance, miou
from seqfold.sim.render import render_mask
from seqfold.training.rollout import RolloutResult, run_policy

FINE_SIDES = np.linspace(0.3125, 0.36875, 10)
FINE_RECT_HEIGHTS = np.linspace(0.275, 0.325, 10)
FINE_ROTATIONS = [0.0, 30.0, 45.0, 60.0]
REAL_SIDES = [0.20, 0.30, 0.35]
REAL_CANONICAL_SIDE = 0.30
REAL_ROTATIONS = [0.0, 30.0, 45.0]


@dataclass(frozen=True)
class GridPoint:
    """One cloth configuration: a scale of the canonical cloth.

    ``height_factor`` scales the height of rectangular cloth on its own;
    without it both sides use ``size_factor``.
    """

    size_factor: float
    rotation_deg: float
    height_factor: Optional[float] = None


@dataclass(frozen=True)
class ConfigGrid:
    """Canonical cloth side plus the configurations derived from it."""

    name: str
    canonical_side: float
    points: Tuple[GridPoint, ...]

    def __len__(self) -> int:
        return len(self.points)


def config_grid(settings: EvalSettings) -> ConfigGrid:
    """Configuration grid named by ``settings.grid``.

    ``desk`` takes its sizes and rotations from the settings; ``fine``
    and ``real`` are fixed. On the fine grid rectangles keep the square
    widths and take their heights from :data:`FINE_RECT_HEIGHTS`.
    """
    heights: List[Optional[float]]
    if settings.grid == "fine":
        side = settings.square_side
        factors = [float(s / side) for s in FINE_SIDES]
        rect_height = settings.rect_size[1]
        heights = [float(h / rect_height) for h in FINE_RECT_HEIGHTS]
        rotations = FINE_ROTATIONS
    elif settings.grid == "real":
        side = REAL_CANONICAL_SIDE
        factors = [s / side for s in REAL_SIDES]
        heights = [None] * len(factors)
        rotations = REAL_ROTATIONS
    else:
        side = settings.square_side
        factors = list(settings.size_factors)
        heights = [None] * len(factors)
        rotations = list(settings.rotations_deg)
    points = tuple(
        GridPoint(size_factor=f, rotation_deg=r, height_factor=h)
        for f, h in zip(factors, heights)
        for r in rotations
    )
    return ConfigGrid(settings.grid, side, points)


def _canonical(
    script: TaskScript, config: RunConfig, grid: ConfigGrid, point: GridPoint
) -> ClothSpec:
    scale = grid.canonical_side / config.eval.square_side
    width, height = config.eval.rect_size
    height_factor = (
        None if point.height_factor is None else point.height_factor * scale
    )
    return script.canonical_spec(
        config.sim,
        size_factor=point.size_factor * scale,
        height_factor=height_factor,
        rotation_deg=point.rotation_deg,
        square_side=config.eval.square_side,
        rect_size=(width, height),
    )


def canonical_demo(
    script: TaskScript, config: RunConfig, grid: ConfigGrid
) -> List[np.ndarray]:
    """Demonstration frames on the unscaled, unrotated cloth."""
    camera = Camera.from_settings(config.sim, config.model.H, config.model.W)
    canonical = _canonical(script, config, grid, GridPoint(1.0, 0.0))
    return collect_demo(script, canonical, camera, config.sim).observations


def run_episode(
    model: Optional[FoldPolicyNet],
    task: TaskId,
    config: RunConfig,
    demo: Sequence[np.ndarray],
    grid: ConfigGrid,
    point: GridPoint,
) -> Tuple[EpisodeRow, List[np.ndarray]]:
    """Evaluate one configuration.

    With ``model=None`` the scripted demonstrator stands in for the
    policy, which makes the run a self-comparison.
    """
    script = get_task_script(task)
    camera = Camera.from_settings(config.sim, config.model.H, config.model.W)
    spec = _canonical(script, config, grid, point)
    reference = collect_demo(script, spec, camera, config.sim)
    if model is None:
        rollout = RolloutResult(
            final_state=reference.final_state,
            actions=list(reference.actions),
            executed=list(reference.executed),
            frames=reference.observations[1:],
        )
    else:
        rollout = run_policy(model, demo, spec, camera, config.sim)
    target = reference.final_state
    radius = config.sim.splat_radius
    row = EpisodeRow(
        task=script.task.value,
        size=spec.width,
        rotation=point.rotation_deg,
        mpd_mm=mean_particle_distance(rollout.final_state, target),
        miou=miou(
            render_mask(rollout.final_state, camera, radius),
            render_mask(target, camera, radius),
        ),
        steps=rollout.steps,
        baseline_mpd_mm=mean_particle_distance(
            init_cloth(spec, config.sim.particle_radius), target
        ),
    )
    return row, rollout.frames


def _map(
    job: Callable[[GridPoint], Tuple[EpisodeRow, List[np.ndarray]]],
    points: Sequence[GridPoint],
    workers: int,
) -> Iterator[Tuple[EpisodeRow, List[np.ndarray]]]:
    if workers <= 1:
        for point in points:
            yield job(point)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(job, points)


def evaluate_task(
    model: Optional[FoldPolicyNet],
    task: TaskId,
    config: RunConfig,
    report: Optional[EvalReport] = None,
    workers: int = 1,
) -> EvalReport:
    """Run every grid configuration of ``task`` and collect the rows.

    The demonstration is rendered once from the canonical cloth
    (size factor 1, no rotation) and shared by all episodes. The model
    is only read.
    """
    logger = logging.getLogger(__name__)
    grid = config_grid(config.eval)
    report = report or EvalReport(grid=grid.name)
    script = get_task_script(task)
    demo = canonical_demo(script, config, grid)

    start = time.perf_counter()
    job = partial(run_episode, model, script.task, config, demo, grid)
    for episode, (row, frames) in enumerate(
        _map(job, grid.points, workers)
    ):
        report.rows.append(row)
        report.frames[f"{row.task}_{episode:02d}"] = frames
        logger.info(
            f"{row.task} size {row.size:.4f} rot {row.rotation:.0f}: "
            f"MPD {row.mpd_mm:.2f} mm (baseline "
            f"{row.baseline_mpd_mm:.2f}), MIoU {row.miou:.3f}"
        )
    report.runtime_s += time.perf_counter() - start
    return report


def evaluate(
    model: Optional[FoldPolicyNet],
    config: RunConfig,
    label: str = "policy",
    workers: int = 1,
) -> EvalReport:
    """Evaluate every task listed in ``config.eval.tasks``."""
    report = EvalReport(label=label, grid=config.eval.grid)
    for task in config.eval.tasks:
        evaluate_task(model, task, config, report, workers)
    return report


def rollout_episode(
    model: Optional[FoldPolicyNet],
    task: TaskId,
    config: RunConfig,
    point: GridPoint,
) -> EvalReport:
    """Evaluate a single configuration, keeping its frames."""
    grid = config_grid(config.eval)
    script = get_task_script(task)
    demo = canonical_demo(script, config, grid)
    row, frames = run_episode(model, script.task, config, demo, grid, point)
    report = EvalReport(label="rollout", grid=grid.name, rows=[row])
    report.frames[f"{row.task}_00"] = frames
    return report


@dataclass(frozen=True)
class MpdOrdering:
    """Mean MPD of one task for the policy and its two reference points."""

    task: str
    policy: float
    untrained: float
    do_nothing: float

    @property
    def holds(self) -> bool:
        """The policy beats both the untrained model and doing nothing."""
        return self.policy < self.untrained and self.policy < self.do_nothing


def compare_to_untrained(
    policy: EvalReport, untrained: EvalReport
) -> List[MpdOrdering]:
    """Per-task MPD ordering of a policy report against an untrained one.

    The do-nothing MPD is the distance from the flat start to the
    demonstrator's result, already recorded on every policy row. A task
    missing from ``untrained`` gets a NaN and never holds.
    """
    logger = logging.getLogger(__name__)
    orderings = []
    for summary in policy.summaries():
        ordering = MpdOrdering(
            task=summary.task,
            policy=summary.mpd_mean,
            untrained=untrained.mean_mpd(summary.task),
            do_nothing=summary.baseline_mpd_mean,
        )
        level = logging.INFO if ordering.holds else logging.WARNING
        logger.log(
            level,
            f"{ordering.task}: policy {ordering.policy:.2f} mm, untrained "
            f"{ordering.untrained:.2f} mm, do-nothing "
            f"{ordering.do_nothing:.2f} mm",
        )
        orderings.append(ordering)
    return orderings
