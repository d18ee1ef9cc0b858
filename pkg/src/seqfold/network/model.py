"""The space-time attention pick-and-place policy."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from seqfold.models.cloth import PickPlaceAction
from seqfold.models.settings import ModelSettings
from seqfold.network.decoder import (
    DECODERS,
    add_decoder_parameters,
    decode_heatmap,
)
from seqfold.network.encoder import (
    AttentionTrace,
    add_block_parameters,
    embed,
    encoder_block,
    feature_filter,
)
from seqfold.network.layers import ParameterBank
from seqfold.network.patches import FrameStack
from seqfold.numeric import Parameter, Tensor, bce_mean, no_grad
from seqfold.utils.exceptions import DimensionError

HeatmapArray = Union[Tensor, np.ndarray]


@dataclass
class HeatmapPair:
    """Pick and place score maps in (0, 1), (H, W) or batched (B, H, W)."""

    pick: HeatmapArray
    place: HeatmapArray

    def numpy(self) -> Tuple[np.ndarray, np.ndarray]:
        def raw(x: HeatmapArray) -> np.ndarray:
            return x.data if isinstance(x, Tensor) else np.asarray(x)

        return raw(self.pick), raw(self.place)

    def item(self, index: int) -> "HeatmapPair":
        """Select one element of a batched pair."""
        pick, place = self.numpy()
        return HeatmapPair(pick[index], place[index])


class FoldPolicyNet:
    """Encoder blocks over an observation + sub-goal stack, two decoders.

    The model is a plain parameter bank plus a pure forward function, so
    a model whose weights are not being trained can serve concurrent
    forward passes.
    """

    def __init__(self, config: ModelSettings, seed: int = 0) -> None:
        """Create randomly initialized weights.

        Args:
            config: Network shape and variant
            seed: Seed for the weight initialization
        """
        self.logger = logging.getLogger(__name__)
        self.config = config
        self.bank = ParameterBank(
            np.random.default_rng(seed),
            config.init_std,
            np.dtype(config.dtype),
        )
        self.bank.normal("embed.weight", config.P * config.P, config.D)
        self.bank.normal(
            "embed.pos", config.frames, config.num_patches, config.D
        )
        for layer in range(config.L):
            add_block_parameters(self.bank, self.block_name(layer), config)
        for name in DECODERS:
            add_decoder_parameters(self.bank, name, config)
        self.trace: Optional[AttentionTrace] = None
        self.logger.debug(
            f"Initialized {config.variant.value} model with "
            f"{self.num_weights()} weights in {len(self.bank)} tensors"
        )

    @staticmethod
    def block_name(layer: int) -> str:
        return f"block{layer:02d}"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.config.dtype)

    def parameters(self) -> List[Parameter]:
        """Parameters in lexicographic name order."""
        return list(self.bank)

    def num_weights(self) -> int:
        return int(sum(p.data.size for p in self.bank))

    def zero_grad(self) -> None:
        for param in self.bank:
            param.zero_grad()

    # -- forward ------------------------------------------------------

    def preprocess(self, frames: np.ndarray) -> Tensor:
        """Turn depth (meters) into scaled height above the table."""
        height = (self.config.depth_offset - frames) * self.config.input_scale
        return Tensor(height.astype(self.dtype))

    def _check_input(self, frames: np.ndarray) -> np.ndarray:
        if frames.ndim == 3:
            frames = frames[None]
        expected = (self.config.frames, self.config.H, self.config.W)
        if frames.ndim != 4 or frames.shape[1:] != expected:
            raise DimensionError(
                "Input stack does not match the model",
                detail=f"got {frames.shape}, expected (B, {expected})",
            )
        return frames

    def encode(self, frames: np.ndarray) -> Tensor:
        """Embed and run all encoder blocks: (B, F + 1, N_p, D)."""
        frames = self._check_input(frames)
        z = embed(self.preprocess(frames), self.bank, self.config.P)
        for layer in range(self.config.L):
            z = encoder_block(
                z, self.bank, self.block_name(layer), self.config, self.trace
            )
        return z

    def forward_tensors(self, frames: np.ndarray) -> HeatmapPair:
        """Differentiable forward pass over a (B, F + 1, H, W) batch."""
        z_filter = feature_filter(self.encode(frames))
        return HeatmapPair(
            pick=decode_heatmap(z_filter, self.bank, "pick", self.config),
            place=decode_heatmap(z_filter, self.bank, "place", self.config),
        )

    def forward(self, stack: Union[FrameStack, np.ndarray]) -> HeatmapPair:
        """Inference on one stack; returns (H, W) numpy heatmaps."""
        frames = stack.frames if isinstance(stack, FrameStack) else stack
        with no_grad():
            heatmaps = self.forward_tensors(frames)
        return heatmaps.item(0)

    def act(self, stack: Union[FrameStack, np.ndarray]) -> PickPlaceAction:
        return select_action(self.forward(stack))


def select_action(heatmaps: HeatmapPair) -> PickPlaceAction:
    """Argmax of each map; ties go to the lowest row-major index."""
    pick, place = heatmaps.numpy()
    return PickPlaceAction(
        pick=_argmax_pixel(pick), place=_argmax_pixel(place)
    )


def _argmax_pixel(heatmap: np.ndarray) -> Tuple[int, int]:
    row, col = np.unravel_index(int(np.argmax(heatmap)), heatmap.shape)
    return int(row), int(col)


def policy_loss(pred: HeatmapPair, target: HeatmapPair) -> Tensor:
    """Sum of the pick-map and place-map mean binary cross-entropies."""
    gt_pick, gt_place = target.numpy()
    pick = Tensor.lift(pred.pick)
    place = Tensor.lift(pred.place)
    return bce_mean(pick, gt_pick.astype(pick.dtype)) + bce_mean(
        place, gt_place.astype(place.dtype)
    )
