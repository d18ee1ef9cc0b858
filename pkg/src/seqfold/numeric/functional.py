"""Differentiable operations used by the policy network.

Every function takes and returns :class:`Tensor` objects and registers
its own backward rule. Shapes are checked up front and reported with
:class:`DimensionError`.
"""

import math
from functools import lru_cache
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from seqfold.numeric.tensor import Tensor
from seqfold.utils.exceptions import DimensionError

LAYER_NORM_EPS = 1e-5
BCE_CLIP_EPS = 1e-7
_GELU_K = math.sqrt(2.0 / math.pi)
_GELU_C = 0.044715


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of two 2-D tensors.

    Raises:
        DimensionError: If the operands are not 2-D or inner sizes differ
    """
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(
            "matmul shape mismatch", detail=f"{a.shape} x {b.shape}"
        )

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return g @ b.data.T, a.data.T @ g

    return Tensor.from_op(a.data @ b.data, (a, b), backward, "matmul")


def bmm(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over identical leading dimensions."""
    if (
        a.ndim < 2
        or a.ndim != b.ndim
        or a.shape[:-2] != b.shape[:-2]
        or a.shape[-1] != b.shape[-2]
    ):
        raise DimensionError(
            "batched matmul shape mismatch", detail=f"{a.shape} x {b.shape}"
        )

    def backward(g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (
            np.matmul(g, np.swapaxes(b.data, -1, -2)),
            np.matmul(np.swapaxes(a.data, -1, -2), g),
        )

    return Tensor.from_op(np.matmul(a.data, b.data), (a, b), backward, "bmm")


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """Affine map ``x @ weight + bias`` over the last axis of ``x``.

    Leading axes are flattened into one batch axis for :func:`matmul`.

    Args:
        x: Input of shape (..., in)
        weight: Matrix of shape (in, out)
        bias: Optional vector of shape (out,)
    """
    if weight.ndim != 2 or x.shape[-1] != weight.shape[0]:
        raise DimensionError(
            "linear shape mismatch", detail=f"{x.shape} x {weight.shape}"
        )
    lead = x.shape[:-1]
    out = matmul(x.reshape(-1, weight.shape[0]), weight)
    if bias is not None:
        out = out + bias
    return out.reshape(*lead, weight.shape[1])


def concat(tensors: Sequence[Tensor], axis: int) -> Tensor:
    """Concatenate tensors along ``axis``."""
    if not tensors:
        raise DimensionError("concat needs at least one tensor")
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g: np.ndarray) -> Sequence[np.ndarray]:
        return [
            np.take(g, np.arange(lo, hi), axis=axis)
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]

    return Tensor.from_op(
        np.concatenate([t.data for t in tensors], axis=axis),
        tuple(tensors),
        backward,
        "concat",
    )


def softmax_last_axis(x: Tensor) -> Tensor:
    """Softmax along the last axis with max subtraction.

    Raises:
        DimensionError: If the last axis is empty
    """
    if x.ndim == 0 or x.shape[-1] < 1:
        raise DimensionError("softmax over an empty axis", detail=str(x.shape))
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    probs = exps / exps.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        dot = (g * probs).sum(axis=-1, keepdims=True)
        return (probs * (g - dot),)

    return Tensor.from_op(probs, (x,), backward, "softmax")


def layer_norm(
    x: Tensor, gamma: Tensor, beta: Tensor, eps: float = LAYER_NORM_EPS
) -> Tensor:
    """Normalize each last-axis slice, then apply ``gamma`` and ``beta``."""
    dim = x.shape[-1]
    if dim < 1 or gamma.shape != (dim,) or beta.shape != (dim,):
        raise DimensionError(
            "layer_norm shape mismatch",
            detail=f"x={x.shape} gamma={gamma.shape} beta={beta.shape}",
        )
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    rstd = 1.0 / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + eps)
    xhat = centered * rstd

    def backward(g: np.ndarray) -> Tuple[np.ndarray, ...]:
        dxhat = g * gamma.data
        dx = rstd * (
            dxhat
            - dxhat.mean(axis=-1, keepdims=True)
            - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
        )
        lead = tuple(range(g.ndim - 1))
        return dx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return Tensor.from_op(
        xhat * gamma.data + beta.data, (x, gamma, beta), backward, "layer_norm"
    )


def gelu(x: Tensor) -> Tensor:
    """Gaussian error linear unit, tanh approximation."""
    inner = _GELU_K * (x.data + _GELU_C * x.data**3)
    t = np.tanh(inner)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        d_inner = _GELU_K * (1.0 + 3.0 * _GELU_C * x.data**2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t**2) * d_inner),)

    return Tensor.from_op(0.5 * x.data * (1.0 + t), (x,), backward, "gelu")


def sigmoid(x: Tensor) -> Tensor:
    """Logistic function, evaluated without overflow for large |x|."""
    e = np.exp(-np.abs(x.data))
    out = np.where(x.data >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    out = out.astype(x.dtype, copy=False)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        return (g * out * (1.0 - out),)

    return Tensor.from_op(out, (x,), backward, "sigmoid")


@lru_cache(maxsize=32)
def _upsample_matrix(size: int, dtype_name: str) -> np.ndarray:
    """Interpolation weights for doubling an axis of length ``size``.

    Output sample i reads source coordinate (i + 0.5) / 2 - 0.5, clamped
    to the valid range.
    """
    matrix = np.zeros((2 * size, size), dtype=np.dtype(dtype_name))
    for i in range(2 * size):
        src = min(max((i + 0.5) / 2.0 - 0.5, 0.0), size - 1.0)
        lo = int(math.floor(src))
        hi = min(lo + 1, size - 1)
        frac = src - lo
        matrix[i, lo] += 1.0 - frac
        matrix[i, hi] += frac
    matrix.setflags(write=False)
    return matrix


def bilinear_upsample2x(x: Tensor) -> Tensor:
    """Double the two trailing (height, width) axes bilinearly."""
    if x.ndim < 2 or x.shape[-1] < 1 or x.shape[-2] < 1:
        raise DimensionError("upsample needs (..., h, w)", detail=str(x.shape))
    rows = _upsample_matrix(x.shape[-2], x.dtype.name)
    cols = _upsample_matrix(x.shape[-1], x.dtype.name)
    out = np.matmul(np.matmul(rows, x.data), cols.T)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        return (np.matmul(np.matmul(rows.T, g), cols),)

    return Tensor.from_op(out, (x,), backward, "upsample2x")


def bce_mean(
    pred: Tensor,
    target: Union[Tensor, np.ndarray],
    eps: float = BCE_CLIP_EPS,
) -> Tensor:
    """Mean binary cross-entropy with ``pred`` clipped to [eps, 1 - eps].

    Raises:
        DimensionError: If ``pred`` and ``target`` shapes differ
    """
    t = target.data if isinstance(target, Tensor) else np.asarray(target)
    if pred.shape != t.shape:
        raise DimensionError(
            "bce shape mismatch", detail=f"{pred.shape} vs {t.shape}"
        )
    p = np.clip(pred.data, eps, 1.0 - eps)
    count = p.size
    losses = -(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))
    inside = (pred.data >= eps) & (pred.data <= 1.0 - eps)

    def backward(g: np.ndarray) -> Tuple[np.ndarray]:
        dp = (-(t / p) + (1.0 - t) / (1.0 - p)) / count
        return ((g * dp * inside).astype(pred.dtype, copy=False),)

    value = np.asarray(losses.mean(), dtype=pred.dtype)
    return Tensor.from_op(value, (pred,), backward, "bce_mean")
