"""Dataset generation for random-action and demonstration corpora."""

import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Union

import numpy as np

from seqfold.data.actions import RandomActionSampler, random_spec
from seqfold.data.demos import collect_demo, get_task_script
from seqfold.data.storage import save_dataset, save_trajectory
from seqfold.data.trajectory import Trajectory, collect_trajectory
from seqfold.models.dataset import DatasetManifest
from seqfold.models.settings import RunConfig, TaskId
from seqfold.sim.camera import Camera

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int], None]


def camera_for(config: RunConfig) -> Camera:
    return Camera.from_settings(config.sim, config.model.H, config.model.W)


def random_trajectory(config: RunConfig, seed: int) -> Trajectory:
    """One random-action trajectory, fully determined by ``seed``."""
    rng = np.random.default_rng(seed)
    spec = random_spec(config.data, config.sim, rng)
    camera = camera_for(config)
    sampler = RandomActionSampler(camera, config.data, config.sim.splat_radius)
    traj = collect_trajectory(
        sampler,
        spec,
        config.data.trajectory_length,
        rng,
        camera,
        config.sim,
    )
    traj.seed = seed
    logger.debug(
        f"Random trajectory seed={seed}: "
        f"{sampler.corner_picks}/{sampler.total} corner picks"
    )
    return traj


def demo_trajectory(config: RunConfig, task: TaskId, seed: int) -> Trajectory:
    """One scripted demonstration on a jittered canonical cloth."""
    rng = np.random.default_rng(seed)
    script = get_task_script(task)
    jitter = config.data.demo_size_jitter
    spec = script.canonical_spec(
        config.sim,
        size_factor=1.0 + float(rng.uniform(-jitter, jitter)),
        rotation_deg=float(rng.choice(config.data.rotations_deg)),
    )
    return collect_demo(script, spec, camera_for(config), config.sim, seed)


def _run_jobs(
    job: Callable[[int], Trajectory],
    seeds: Iterable[int],
    workers: int,
) -> Iterator[Trajectory]:
    if workers <= 1:
        for seed in seeds:
            yield job(seed)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(job, seeds)


def _write(
    root: Path,
    manifest: DatasetManifest,
    trajectories: Iterable[Trajectory],
    progress: Optional[ProgressCallback],
) -> DatasetManifest:
    root.mkdir(parents=True, exist_ok=True)
    for index, traj in enumerate(trajectories):
        manifest.trajectories.append(save_trajectory(root, index, traj))
        if progress is not None:
            progress(index + 1)
    return save_dataset(root, manifest)


def _manifest(config: RunConfig, kind: str, seed: int) -> DatasetManifest:
    data = config.data
    return DatasetManifest(
        kind=kind,
        seed=seed,
        image_size=[config.model.H, config.model.W],
        camera_height=config.sim.camera_height,
        extent=config.sim.extent,
        counts={"trajectory_length": data.trajectory_length},
        spec_ranges={
            "side_range": list(data.side_range),
            "rect_probability": data.rect_probability,
            "rect_aspect": data.rect_aspect,
            "rotations_deg": list(data.rotations_deg),
            "grid": [config.sim.grid_rows, config.sim.grid_cols],
        },
    )


def generate_random_dataset(
    config: RunConfig,
    root: Union[str, Path],
    workers: int = 1,
    progress: Optional[ProgressCallback] = None,
) -> DatasetManifest:
    """Collect ``data.random_trajectories`` random trajectories.

    Trajectory ``i`` uses seed ``data.base_seed + i``, so the output is
    the same for any worker count.
    """
    base = config.data.base_seed
    count = config.data.random_trajectories
    logger.info(
        f"Generating {count} random trajectories of length "
        f"{config.data.trajectory_length} with {workers} worker(s)"
    )
    seeds = range(base, base + count)
    trajectories = _run_jobs(
        partial(random_trajectory, config), seeds, workers
    )
    return _write(
        Path(root), _manifest(config, "random", base), trajectories, progress
    )


def generate_demo_dataset(
    config: RunConfig,
    task: TaskId,
    root: Union[str, Path],
    workers: int = 1,
    progress: Optional[ProgressCallback] = None,
) -> DatasetManifest:
    """Collect ``data.demos_per_task`` demonstrations of ``task``."""
    script = get_task_script(task)
    base = config.data.base_seed
    count = config.data.demos_per_task
    logger.info(f"Generating {count} {script.task.value} demonstrations")
    manifest = _manifest(config, script.task.value, base)
    manifest.task = script.task.value
    manifest.counts["trajectory_length"] = script.num_actions
    manifest.example_spec = script.canonical_spec(config.sim)
    manifest.spec_ranges["size_jitter"] = config.data.demo_size_jitter
    seeds = range(base, base + count)
    trajectories = _run_jobs(
        partial(demo_trajectory, config, script.task), seeds, workers
    )
    return _write(Path(root), manifest, trajectories, progress)

