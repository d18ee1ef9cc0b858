"""Dense arrays, reverse-mode gradients and the Adam update rule."""

from seqfold.numeric.functional import (
    bce_mean,
    bilinear_upsample2x,
    bmm,
    concat,
    gelu,
    layer_norm,
    linear,
    matmul,
    sigmoid,
    softmax_last_axis,
)
from seqfold.numeric.gradcheck import GradCheckReport, grad_check
from seqfold.numeric.optim import Adam, AdamState, adam_step
from seqfold.numeric.tensor import Parameter, Tensor, no_grad

__all__ = [
    "Adam",
    "AdamState",
    "GradCheckReport",
    "Parameter",
    "Tensor",
    "adam_step",
    "bce_mean",
    "bilinear_upsample2x",
    "bmm",
    "concat",
    "gelu",
    "grad_check",
    "layer_norm",
    "linear",
    "matmul",
    "no_grad",
    "sigmoid",
    "softmax_last_axis",
]
