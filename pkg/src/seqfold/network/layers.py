"""Parameter bookkeeping and the attention/MLP building blocks."""

import math
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from seqfold.numeric import (
    Parameter,
    Tensor,
    bmm,
    gelu,
    layer_norm,
    linear,
    softmax_last_axis,
)
from seqfold.utils.exceptions import ConfigError


class ParameterBank:
    """Named parameters of one model, created in a fixed order.

    Names are unique; iteration and serialization use lexicographic name
    order.
    """

    def __init__(
        self, rng: np.random.Generator, std: float, dtype: np.dtype
    ) -> None:
        self._rng = rng
        self._std = std
        self._dtype = np.dtype(dtype)
        self._params: Dict[str, Parameter] = {}

    def _add(self, name: str, value: np.ndarray) -> Parameter:
        if name in self._params:
            raise ConfigError(f"Duplicate parameter name: {name}")
        param = Parameter(name, value.astype(self._dtype))
        self._params[name] = param
        return param

    def normal(self, name: str, *shape: int) -> Parameter:
        return self._add(name, self._rng.normal(0.0, self._std, size=shape))

    def zeros(self, name: str, *shape: int) -> Parameter:
        return self._add(name, np.zeros(shape))

    def ones(self, name: str, *shape: int) -> Parameter:
        return self._add(name, np.ones(shape))

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[Parameter]:
        for name in sorted(self._params):
            yield self._params[name]

    def names(self) -> List[str]:
        return sorted(self._params)

    def add_norm(self, prefix: str, dim: int) -> None:
        self.ones(f"{prefix}.gamma", dim)
        self.zeros(f"{prefix}.beta", dim)

    def add_attention(self, prefix: str, dim: int) -> None:
        for proj in ("q", "k", "v", "o"):
            self.normal(f"{prefix}.w{proj}", dim, dim)
            self.zeros(f"{prefix}.b{proj}", dim)

    def add_mlp(self, prefix: str, dim: int, hidden: int) -> None:
        self.normal(f"{prefix}.w1", dim, hidden)
        self.zeros(f"{prefix}.b1", hidden)
        self.normal(f"{prefix}.w2", hidden, dim)
        self.zeros(f"{prefix}.b2", dim)


def norm(x: Tensor, bank: ParameterBank, prefix: str) -> Tensor:
    return layer_norm(x, bank[f"{prefix}.gamma"], bank[f"{prefix}.beta"])


def _split_heads(x: Tensor, heads: int) -> Tensor:
    batch, length, dim = x.shape
    return x.reshape(batch, length, heads, dim // heads).transpose(0, 2, 1, 3)


def multi_head_attention(
    queries: Tensor,
    keys_values: Tensor,
    bank: ParameterBank,
    prefix: str,
    heads: int,
) -> Tuple[Tensor, np.ndarray]:
    """Scaled dot-product attention over the middle axis.

    Args:
        queries: (S, Lq, D) query tokens
        keys_values: (S, Lk, D) tokens providing keys and values
        bank: Parameter bank holding ``{prefix}.w{q,k,v,o}`` and biases
        prefix: Parameter name prefix
        heads: Number of heads; D must be divisible by it

    Returns:
        Tuple of the (S, Lq, D) output and the (S, heads, Lq, Lk)
        attention weights.
    """
    batch, length, dim = queries.shape
    q = _split_heads(
        linear(queries, bank[f"{prefix}.wq"], bank[f"{prefix}.bq"]), heads
    )
    k = _split_heads(
        linear(keys_values, bank[f"{prefix}.wk"], bank[f"{prefix}.bk"]), heads
    )
    v = _split_heads(
        linear(keys_values, bank[f"{prefix}.wv"], bank[f"{prefix}.bv"]), heads
    )
    scores = bmm(q, k.swap_last()) * (1.0 / math.sqrt(dim // heads))
    weights = softmax_last_axis(scores)
    mixed = bmm(weights, v).transpose(0, 2, 1, 3).reshape(batch, length, dim)
    out = linear(mixed, bank[f"{prefix}.wo"], bank[f"{prefix}.bo"])
    return out, weights.data


def mlp(x: Tensor, bank: ParameterBank, prefix: str) -> Tensor:
    hidden = gelu(linear(x, bank[f"{prefix}.w1"], bank[f"{prefix}.b1"]))
    return linear(hidden, bank[f"{prefix}.w2"], bank[f"{prefix}.b2"])


def conv1x1(
    x: Tensor, weight: Tensor, bias: Optional[Tensor] = None
) -> Tensor:
    """1x1 convolution on a (B, C, h, w) tensor."""
    channels_last = x.transpose(0, 2, 3, 1)
    return linear(channels_last, weight, bias).transpose(0, 3, 1, 2)
