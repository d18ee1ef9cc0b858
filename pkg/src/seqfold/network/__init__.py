"""The space-time attention pick-and-place policy network."""

from seqfold.network.checkpoint import load_checkpoint, save_checkpoint
from seqfold.network.decoder import decode_heatmap
from seqfold.network.encoder import (
    embed,
    encoder_block,
    feature_filter,
    space_msa,
    time_ma_cross,
    time_msa,
)
from seqfold.network.model import (
    FoldPolicyNet,
    HeatmapPair,
    policy_loss,
    select_action,
)
from seqfold.network.patches import (
    FrameStack,
    decompose_patches,
    pad_subgoals,
    reassemble_patches,
)

__all__ = [
    "FoldPolicyNet",
    "FrameStack",
    "HeatmapPair",
    "decode_heatmap",
    "decompose_patches",
    "embed",
    "encoder_block",
    "feature_filter",
    "load_checkpoint",
    "pad_subgoals",
    "policy_loss",
    "reassemble_patches",
    "save_checkpoint",
    "select_action",
    "space_msa",
    "time_ma_cross",
    "time_msa",
]
