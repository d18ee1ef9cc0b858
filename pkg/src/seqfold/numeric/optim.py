"""Adam optimizer with bias correction."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from seqfold.numeric.tensor import Parameter
from seqfold.utils.exceptions import DimensionError, NumericError

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    """First/second moment buffers keyed by parameter name."""

    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Sequence[Parameter],
    grads: Sequence[np.ndarray],
    state: AdamState,
) -> AdamState:
    """Apply one Adam update to ``params`` in place.

    All gradients are validated before any parameter is touched, so a
    rejected step leaves the model and the state unchanged.

    Args:
        params: Parameters to update
        grads: One gradient array per parameter, same shapes
        state: Optimizer state, updated in place and returned

    Returns:
        AdamState: The updated state

    Raises:
        NumericError: If a gradient contains NaN or infinite values
        DimensionError: If a gradient shape differs from its parameter
    """
    if len(params) != len(grads):
        raise DimensionError(
            "adam_step needs one gradient per parameter",
            detail=f"{len(params)} params, {len(grads)} grads",
        )
    for param, grad in zip(params, grads):
        if grad.shape != param.data.shape:
            raise DimensionError(
                f"Gradient shape mismatch for {param.name}",
                detail=f"{grad.shape} vs {param.data.shape}",
            )
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"Non-finite gradient for {param.name}")

    state.step += 1
    bias1 = 1.0 - state.beta1**state.step
    bias2 = 1.0 - state.beta2**state.step
    for param, grad in zip(params, grads):
        m = state.m.get(param.name)
        v = state.v.get(param.name)
        if m is None or v is None:
            m = np.zeros_like(param.data)
            v = np.zeros_like(param.data)
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        m_hat = m / bias1
        v_hat = v / bias2
        update = state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        param.data = (param.data - update).astype(param.data.dtype)
        state.m[param.name] = m.astype(param.data.dtype)
        state.v[param.name] = v.astype(param.data.dtype)
    return state


class Adam:
    """Stateful wrapper that steps a fixed parameter list."""

    def __init__(
        self,
        params: Sequence[Parameter],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        state: Optional[AdamState] = None,
    ) -> None:
        self.params = list(params)
        self.state = state or AdamState(
            lr=lr, beta1=beta1, beta2=beta2, eps=eps
        )
        logger.debug(
            f"Adam over {len(self.params)} parameters, lr={self.state.lr}"
        )

    def zero_grad(self) -> None:
        for param in self.params:
            param.zero_grad()

    def step(self) -> None:
        grads = [
            p.grad if p.grad is not None else np.zeros_like(p.data)
            for p in self.params
        ]
        adam_step(self.params, grads, self.state)
