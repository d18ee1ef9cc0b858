"""Patch embedding and the divided space-time encoder block.

Token tensors are laid out (B, T, N_p, D): batch, frame (observation
first, then the F sub-goals in temporal order), spatial location, and
channel.
"""

from typing import Dict, Optional

import numpy as np

from seqfold.models.settings import ModelSettings, Variant
from seqfold.network.layers import (
    ParameterBank,
    mlp,
    multi_head_attention,
    norm,
)
from seqfold.network.patches import decompose_patches
from seqfold.numeric import Tensor, concat, linear
from seqfold.utils.exceptions import ConfigError

AttentionTrace = Dict[str, np.ndarray]


def embed(frames: Tensor, bank: ParameterBank, patch: int) -> Tensor:
    """Linear patch embedding plus the learned space-time position table.

    Args:
        frames: (B, T, H, W) preprocessed frames
        bank: Holds ``embed.weight`` (P*P, D) and ``embed.pos`` (T, N_p, D)
        patch: Patch size P

    Raises:
        ConfigError: If the frame count does not match the position table
    """
    pos = bank["embed.pos"]
    if frames.shape[1] != pos.shape[0]:
        raise ConfigError(
            "Frame count does not match the position embedding",
            detail=f"{frames.shape[1]} frames, table for {pos.shape[0]}",
        )
    patches = Tensor(decompose_patches(frames.data, patch))
    return linear(patches, bank["embed.weight"]) + pos


def space_msa(
    z: Tensor,
    bank: ParameterBank,
    prefix: str,
    heads: int,
    trace: Optional[AttentionTrace] = None,
) -> Tensor:
    """Pre-norm self-attention among the tokens of each frame."""
    batch, frames, patches, dim = z.shape
    flat = z.reshape(batch * frames, patches, dim)
    normed = norm(flat, bank, f"{prefix}.ln_space")
    out, weights = multi_head_attention(
        normed, normed, bank, f"{prefix}.space", heads
    )
    if trace is not None:
        trace[f"{prefix}.space"] = weights
    return (out + flat).reshape(batch, frames, patches, dim)


def time_msa(
    z_subgoal: Tensor,
    bank: ParameterBank,
    prefix: str,
    heads: int,
    trace: Optional[AttentionTrace] = None,
) -> Tensor:
    """Pre-norm self-attention across sub-goal frames at each location."""
    batch, frames, patches, dim = z_subgoal.shape
    per_location = z_subgoal.transpose(0, 2, 1, 3).reshape(
        batch * patches, frames, dim
    )
    normed = norm(per_location, bank, f"{prefix}.ln_time")
    out, weights = multi_head_attention(
        normed, normed, bank, f"{prefix}.time", heads
    )
    if trace is not None:
        trace[f"{prefix}.time"] = weights
    mixed = (out + per_location).reshape(batch, patches, frames, dim)
    return mixed.transpose(0, 2, 1, 3)


def time_ma_cross(
    z_obs: Tensor,
    z_subgoal: Tensor,
    bank: ParameterBank,
    prefix: str,
    heads: int,
    cross_norm: str = "post",
    trace: Optional[AttentionTrace] = None,
) -> Tensor:
    """Observation tokens query the sub-goal tokens at the same location.

    With ``cross_norm="post"`` the output is
    ``LN(attention(obs, subgoal, subgoal)) + obs``; ``"pre"`` normalizes
    the query instead, ``attention(LN(obs), subgoal, subgoal) + obs``.
    """
    batch, _, patches, dim = z_obs.shape
    frames = z_subgoal.shape[1]
    query = z_obs.reshape(batch * patches, 1, dim)
    memory = z_subgoal.transpose(0, 2, 1, 3).reshape(
        batch * patches, frames, dim
    )
    if cross_norm == "pre":
        out, weights = multi_head_attention(
            norm(query, bank, f"{prefix}.ln_cross"),
            memory,
            bank,
            f"{prefix}.cross",
            heads,
        )
    else:
        out, weights = multi_head_attention(
            query, memory, bank, f"{prefix}.cross", heads
        )
        out = norm(out, bank, f"{prefix}.ln_cross")
    if trace is not None:
        trace[f"{prefix}.cross"] = weights
    return (out + query).reshape(batch, 1, patches, dim)


def add_block_parameters(
    bank: ParameterBank, prefix: str, config: ModelSettings
) -> None:
    """Create the parameters one encoder block of ``config`` uses."""
    dim = config.D
    bank.add_norm(f"{prefix}.ln_space", dim)
    bank.add_attention(f"{prefix}.space", dim)
    if config.variant is not Variant.NO_TIME_ATTN:
        bank.add_norm(f"{prefix}.ln_time", dim)
        bank.add_attention(f"{prefix}.time", dim)
        bank.add_norm(f"{prefix}.ln_cross", dim)
        bank.add_attention(f"{prefix}.cross", dim)
    bank.add_norm(f"{prefix}.ln_mlp", dim)
    bank.add_mlp(f"{prefix}.mlp", dim, dim * config.mlp_ratio)


def encoder_block(
    z: Tensor,
    bank: ParameterBank,
    prefix: str,
    config: ModelSettings,
    trace: Optional[AttentionTrace] = None,
) -> Tensor:
    """One encoder block; the output has the input's shape.

    Frame 0 is the observation stream, frames 1..F the sub-goal stream.
    Space attention runs on both with shared weights. The full variant
    then runs time attention on the sub-goals and lets the observation
    attend to them; ``NoTimeAttn`` skips both. The two streams are
    concatenated back along time and passed through the shared MLP.
    """
    spaced = space_msa(z, bank, prefix, config.heads, trace)
    obs, subgoal = spaced[:, :1], spaced[:, 1:]
    if config.variant is not Variant.NO_TIME_ATTN:
        subgoal = time_msa(subgoal, bank, prefix, config.heads, trace)
        obs = time_ma_cross(
            obs,
            subgoal,
            bank,
            prefix,
            config.heads,
            config.cross_norm,
            trace,
        )
    joined = concat([obs, subgoal], axis=1)
    hidden = norm(joined, bank, f"{prefix}.ln_mlp")
    return mlp(hidden, bank, f"{prefix}.mlp") + joined


def feature_filter(z_output: Tensor) -> Tensor:
    """Concatenate observation and goal tokens along channels.

    (B, F + 1, N_p, D) -> (B, N_p, 2D); frames 2..F do not reach the
    decoders.
    """
    return concat([z_output[:, 0], z_output[:, -1]], axis=-1)
