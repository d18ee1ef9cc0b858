"""Dataset directories: raw float32 frames, JSON actions and a manifest.

Layout under a dataset root::

    manifest.json
    traj_00000/
        obs_000.f32 ... obs_MMM.f32     depth images, H*W values each
        states_000.f32 ...              particle xyz triples
        actions.json                    [{"pick": [r, c], "place": [r, c]}]
        spec.json                       cloth spec
"""

import logging
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Union

from pydantic import ValidationError

from seqfold.data.trajectory import (
    Sample,
    Trajectory,
    demo_samples,
    split_samples,
)
from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.dataset import (
    DATASET_VERSION,
    DatasetManifest,
    FileEntry,
    TrajectoryEntry,
)
from seqfold.utils.exceptions import DatasetError
from seqfold.utils.file_utils import (
    check_file,
    read_f32,
    read_json,
    write_f32,
    write_json,
)

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"


def trajectory_dir(index: int) -> str:
    return f"traj_{index:05d}"


def save_trajectory(
    root: Path, index: int, traj: Trajectory
) -> TrajectoryEntry:
    """Write one trajectory directory and return its index record."""
    directory = trajectory_dir(index)
    target = root / directory
    target.mkdir(parents=True, exist_ok=True)
    files: List[FileEntry] = []

    def record(name: str, size: int) -> None:
        files.append(FileEntry(path=f"{directory}/{name}", bytes=size))

    for step, frame in enumerate(traj.observations):
        name = f"obs_{step:03d}.f32"
        record(name, write_f32(target / name, frame))
    for step, positions in enumerate(traj.states):
        name = f"states_{step:03d}.f32"
        record(name, write_f32(target / name, positions))
    actions = [action.as_json() for action in traj.actions]
    record("actions.json", write_json(target / "actions.json", actions))
    spec = traj.spec.model_dump(mode="json")
    record("spec.json", write_json(target / "spec.json", spec))

    return TrajectoryEntry(
        index=index,
        directory=directory,
        seed=traj.seed,
        num_actions=traj.num_actions,
        num_particles=len(traj.states[0]),
        files=files,
        noops=[i for i, ok in enumerate(traj.executed) if not ok],
    )


def save_dataset(
    root: Union[str, Path],
    manifest: DatasetManifest,
    trajectories: Sequence[Trajectory] = (),
) -> DatasetManifest:
    """Write trajectories (if given) and the manifest under ``root``.

    Trajectories already written with :func:`save_trajectory` can be
    listed in ``manifest`` directly and ``trajectories`` left empty.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for offset, traj in enumerate(trajectories):
        index = len(manifest.trajectories) + offset
        manifest.trajectories.append(save_trajectory(root, index, traj))
    manifest.counts["trajectories"] = len(manifest.trajectories)
    manifest.counts["actions"] = sum(
        entry.num_actions for entry in manifest.trajectories
    )
    write_json(root / MANIFEST, manifest.model_dump(mode="json"))
    logger.info(
        f"Wrote {len(manifest.trajectories)} trajectories to {root}"
    )
    return manifest


class Dataset:
    """A validated dataset directory with lazy trajectory access."""

    def __init__(self, root: Path, manifest: DatasetManifest) -> None:
        self.logger = logging.getLogger(__name__)
        self.root = root
        self.manifest = manifest

    def __len__(self) -> int:
        return len(self.manifest.trajectories)

    @property
    def image_shape(self) -> tuple:
        height, width = self.manifest.image_size
        return height, width

    def trajectory(self, index: int) -> Trajectory:
        """Read trajectory ``index`` (position in the manifest)."""
        entry = self.manifest.trajectories[index]
        base = self.root / entry.directory
        frames = [
            read_f32(base / f"obs_{step:03d}.f32", self.image_shape)
            for step in range(entry.num_actions + 1)
        ]
        states = [
            read_f32(base / f"states_{step:03d}.f32", (entry.num_particles, 3))
            for step in range(entry.num_actions + 1)
        ]
        try:
            actions = [
                PickPlaceAction.model_validate(item)
                for item in read_json(base / "actions.json")
            ]
            spec = ClothSpec.model_validate(read_json(base / "spec.json"))
        except ValidationError as e:
            raise DatasetError(
                f"Malformed trajectory in {base}", detail=str(e)
            )
        executed = [i not in entry.noops for i in range(len(actions))]
        return Trajectory(
            spec=spec,
            observations=frames,
            actions=actions,
            states=states,
            executed=executed,
            seed=entry.seed,
        )

    def trajectories(self) -> Iterator[Trajectory]:
        for index in range(len(self)):
            yield self.trajectory(index)

    def samples(
        self, K: int, sigma: Optional[float] = None, pad_short: bool = False
    ) -> List[Sample]:
        """Training samples of every trajectory.

        Args:
            K: Sub-trajectory length
            sigma: Target heatmap width in pixels, H / 32 when None
            pad_short: Pad trajectories shorter than K (demonstrations)
        """
        split = demo_samples if pad_short else split_samples
        samples: List[Sample] = []
        for traj in self.trajectories():
            samples.extend(split(traj, K, sigma))
        self.logger.debug(
            f"Built {len(samples)} samples from {len(self)} trajectories"
        )
        return samples


def load_dataset(root: Union[str, Path]) -> Dataset:
    """Open a dataset directory and validate every listed file.

    Raises:
        DatasetError: On a missing file, a length mismatch or a version
            mismatch
    """
    root = Path(root)
    if root.is_file():
        root = root.parent
    raw = read_json(root / MANIFEST)
    if not isinstance(raw, dict) or raw.get("version") != DATASET_VERSION:
        found = raw.get("version") if isinstance(raw, dict) else None
        raise DatasetError(
            f"Unsupported dataset version in {root / MANIFEST}",
            detail=f"found {found}, expected {DATASET_VERSION}",
        )
    try:
        manifest = DatasetManifest.model_validate(raw)
    except ValidationError as e:
        raise DatasetError(
            f"Malformed manifest {root / MANIFEST}", detail=str(e)
        )
    for entry in manifest.trajectories:
        for item in entry.files:
            check_file(root / item.path, item.bytes)
    logger.info(
        f"Loaded dataset {root} ({manifest.kind}, "
        f"{len(manifest.trajectories)} trajectories)"
    )
    return Dataset(root, manifest)
