"""Pretraining on random trajectories followed by demo fine-tuning."""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Sequence, Union

import numpy as np

from seqfold.data.storage import load_dataset
from seqfold.data.trajectory import Sample
from seqfold.models.settings import ModelSettings, RunConfig, Variant
from seqfold.network.checkpoint import save_checkpoint
from seqfold.network.model import FoldPolicyNet, HeatmapPair, policy_loss
from seqfold.network.patches import pad_subgoals
from seqfold.numeric import Adam
from seqfold.utils.exceptions import DatasetError, NumericError

LOSS_TRACE_COLUMNS = ["step", "phase", "loss"]

StepCallback = Callable[[int, float], None]


@dataclass
class LossRecord:
    step: int
    phase: str
    loss: float


@dataclass
class TrainResult:
    """Trained model, its loss trace and where they were written."""

    model: FoldPolicyNet
    trace: List[LossRecord] = field(default_factory=list)
    checkpoint: Optional[Path] = None
    loss_trace: Optional[Path] = None

    @property
    def steps(self) -> int:
        return len(self.trace)

    @property
    def final_loss(self) -> float:
        return self.trace[-1].loss if self.trace else float("nan")


def sample_frames(sample: Sample, config: ModelSettings) -> np.ndarray:
    """Network input for one sample, (F + 1, H, W).

    The goal-conditioned variant sees only the next frame as its goal.
    """
    if config.variant is Variant.GOAL_CONDITIONED:
        goals = [sample.next_frame]
    else:
        goals = pad_subgoals(sample.subgoals, config.F)
    return np.stack([sample.current, *goals])


def batch_arrays(
    samples: Sequence[Sample], config: ModelSettings
) -> tuple:
    """Stack inputs and target heatmaps of a batch."""
    frames = np.stack([sample_frames(s, config) for s in samples])
    targets = [s.target_heatmaps.numpy() for s in samples]
    pick = np.stack([t[0] for t in targets])
    place = np.stack([t[1] for t in targets])
    return frames, HeatmapPair(pick=pick, place=place)


def shuffled_batches(
    count: int, batch_size: int, rng: np.random.Generator
) -> Iterator[np.ndarray]:
    """Index batches of one epoch in a seed-derived order."""
    order = rng.permutation(count)
    for start in range(0, count, batch_size):
        yield order[start : start + batch_size]


class Trainer:
    """Adam on the summed pick and place BCE, one phase at a time."""

    def __init__(
        self,
        config: RunConfig,
        model: Optional[FoldPolicyNet] = None,
        on_step: Optional[StepCallback] = None,
    ) -> None:
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.settings = config.train
        self.model = model or FoldPolicyNet(
            config.model, seed=self.settings.seed
        )
        self.optimizer = Adam(self.model.parameters(), lr=self.settings.lr)
        self.rng = np.random.default_rng(self.settings.seed)
        self.on_step = on_step
        self.trace: List[LossRecord] = []

    @property
    def step_count(self) -> int:
        return len(self.trace)

    def _budget_left(self) -> bool:
        limit = self.settings.max_steps
        return limit is None or self.step_count < limit

    def step(self, samples: Sequence[Sample], phase: str) -> float:
        """One optimizer update on ``samples``.

        Raises:
            NumericError: If the loss or a gradient is not finite
        """
        frames, target = batch_arrays(samples, self.model.config)
        self.optimizer.zero_grad()
        try:
            loss = policy_loss(self.model.forward_tensors(frames), target)
            value = loss.item()
            if not np.isfinite(value):
                raise NumericError("Loss is not finite", detail=str(value))
            loss.backward()
            self.optimizer.step()
        except NumericError as e:
            raise NumericError(
                f"Training diverged at step {self.step_count} ({phase})",
                detail=str(e),
            )
        self.trace.append(LossRecord(self.step_count, phase, value))
        if self.on_step is not None:
            self.on_step(self.step_count, value)
        return value

    def run_phase(
        self, samples: Sequence[Sample], phase: str, epochs: int
    ) -> None:
        """Train for ``epochs`` passes over ``samples``."""
        if self.settings.max_samples is not None:
            samples = samples[: self.settings.max_samples]
        if not samples or epochs == 0:
            self.logger.info(f"Skipping {phase}: nothing to train on")
            return
        self.logger.info(
            f"{phase}: {len(samples)} samples, {epochs} epochs, "
            f"batch {self.settings.batch_size}"
        )
        for epoch in range(epochs):
            for batch in shuffled_batches(
                len(samples), self.settings.batch_size, self.rng
            ):
                if not self._budget_left():
                    self.logger.info(
                        f"Step budget {self.settings.max_steps} reached"
                    )
                    return
                loss = self.step([samples[i] for i in batch], phase)
                if self.step_count % self.settings.log_every == 0:
                    self.logger.info(
                        f"{phase} epoch {epoch} step {self.step_count} "
                        f"loss {loss:.5f}"
                    )

    def fit(
        self,
        random_samples: Sequence[Sample],
        demo_samples: Sequence[Sample] = (),
    ) -> List[LossRecord]:
        """Pretrain, then fine-tune; returns the full loss trace."""
        self.run_phase(
            random_samples, "pretrain", self.settings.pretrain_epochs
        )
        self.run_phase(
            demo_samples, "finetune", self.settings.finetune_epochs
        )
        return self.trace


def write_loss_trace(
    trace: Sequence[LossRecord], path: Union[str, Path]
) -> Path:
    """CSV with columns step, phase, loss."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(LOSS_TRACE_COLUMNS)
        for record in trace:
            writer.writerow([record.step, record.phase, repr(record.loss)])
    return path


def load_samples(config: RunConfig) -> tuple:
    """Random-data and demo samples named by the train section.

    Raises:
        DatasetError: If no dataset is configured
    """
    train, K = config.train, config.data.K
    sigma = config.data.sigma
    if train.random_dataset is None and not train.demo_datasets:
        raise DatasetError(
            "No training data configured",
            detail="set train.random_dataset or train.demo_datasets",
        )
    random_samples: List[Sample] = []
    if train.random_dataset is not None:
        random_samples = load_dataset(train.random_dataset).samples(K, sigma)
    demos: List[Sample] = []
    for path in train.demo_datasets:
        demos.extend(load_dataset(path).samples(K, sigma, pad_short=True))
    return random_samples, demos


def train(
    config: RunConfig,
    out_dir: Union[str, Path],
    on_step: Optional[StepCallback] = None,
) -> TrainResult:
    """Train from the configured datasets and write the artifacts.

    Writes ``model.ckpt`` (or ``train.checkpoint``) and ``loss_trace.csv``.
    """
    out_dir = Path(out_dir)
    random_samples, demos = load_samples(config)
    trainer = Trainer(config, on_step=on_step)
    trainer.fit(random_samples, demos)
    checkpoint = Path(config.train.checkpoint or out_dir / "model.ckpt")
    result = TrainResult(
        model=trainer.model,
        trace=trainer.trace,
        checkpoint=save_checkpoint(trainer.model, checkpoint),
        loss_trace=write_loss_trace(
            trainer.trace, out_dir / "loss_trace.csv"
        ),
    )
    logging.getLogger(__name__).info(
        f"Trained {result.steps} steps, final loss {result.final_loss:.5f}"
    )
    return result
