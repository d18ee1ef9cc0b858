"""Progressive-upsampling heatmap decoders."""

import math
from typing import List

from seqfold.models.settings import ModelSettings
from seqfold.network.layers import ParameterBank, conv1x1
from seqfold.numeric import Tensor, bilinear_upsample2x, gelu, sigmoid
from seqfold.utils.exceptions import ConfigError

DECODERS = ("pick", "place")


def add_decoder_parameters(
    bank: ParameterBank, name: str, config: ModelSettings
) -> None:
    """Create one decoder: 1x1 convolutions of ``config.decoder_channels``.

    The output bias starts at the logit of ``config.heatmap_prior``.
    """
    channels: List[int] = [2 * config.D, *config.decoder_channels]
    last = len(channels) - 2
    for layer, (c_in, c_out) in enumerate(zip(channels[:-1], channels[1:])):
        bank.normal(f"decoder.{name}.conv{layer}.weight", c_in, c_out)
        bias = bank.zeros(f"decoder.{name}.conv{layer}.bias", c_out)
        if layer == last:
            prior = config.heatmap_prior
            bias.data[...] = math.log(prior / (1.0 - prior))


def decode_heatmap(
    z_filter: Tensor,
    bank: ParameterBank,
    name: str,
    config: ModelSettings,
) -> Tensor:
    """Decode (B, N_p, 2D) filtered tokens into a (B, H, W) heatmap.

    Convolutions and x2 bilinear upsamplings alternate; every
    convolution but the last is followed by GELU, the last by a sigmoid.

    Raises:
        ConfigError: If the upsampling chain does not reach (H, W)
    """
    layers = len(config.decoder_channels)
    if config.P != 2 ** (layers - 1):
        raise ConfigError(
            f"Decoder with {layers - 1} upsamplings needs P="
            f"{2 ** (layers - 1)}, got P={config.P}"
        )
    batch = z_filter.shape[0]
    rows, cols = config.grid
    x = z_filter.reshape(batch, rows, cols, z_filter.shape[-1])
    x = x.transpose(0, 3, 1, 2)
    for layer in range(layers):
        x = conv1x1(
            x,
            bank[f"decoder.{name}.conv{layer}.weight"],
            bank[f"decoder.{name}.conv{layer}.bias"],
        )
        if layer == layers - 1:
            break
        x = bilinear_upsample2x(gelu(x))
    return sigmoid(x).reshape(batch, config.H, config.W)
