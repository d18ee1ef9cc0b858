"""Finite-difference verification of analytic gradients."""

import logging
from typing import Callable, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel

from seqfold.numeric.tensor import Parameter, Tensor, no_grad

logger = logging.getLogger(__name__)

RELATIVE_FLOOR = 1e-5


class GradCheckReport(BaseModel):
    """Outcome of a gradient check; failure is reported, never raised."""

    max_relative_error: float
    worst_parameter: Optional[str] = None
    worst_index: Optional[List[int]] = None
    coordinates_checked: int
    tolerance: float
    passed: bool


def relative_error(analytic: float, numeric: float) -> float:
    """Return ``|a - n| / max(|a| + |n|, 1e-5)``."""
    denom = max(abs(analytic) + abs(numeric), RELATIVE_FLOOR)
    return abs(analytic - numeric) / denom


def grad_check(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    h: float = 1e-5,
    tol: float = 1e-4,
    max_coords: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> GradCheckReport:
    """Compare analytic gradients with central finite differences.

    Args:
        loss_fn: Deterministic function returning a scalar tensor
        params: Parameters to check; their values are restored afterwards
        h: Finite-difference step
        tol: Pass threshold on the max relative error
        max_coords: If given, check at most this many random coordinates
            per parameter
        rng: Random generator for coordinate sampling

    Returns:
        GradCheckReport: The worst relative error found
    """
    rng = rng or np.random.default_rng(0)
    for param in params:
        param.zero_grad()
    loss_fn().backward()
    analytic = {p.name: np.array(p.grad, copy=True) for p in params}

    worst = 0.0
    worst_name: Optional[str] = None
    worst_index: Optional[List[int]] = None
    checked = 0
    for param in params:
        flat_count = param.data.size
        if max_coords is not None and flat_count > max_coords:
            coords = rng.choice(flat_count, size=max_coords, replace=False)
        else:
            coords = np.arange(flat_count)
        for flat in coords:
            index = np.unravel_index(int(flat), param.data.shape)
            original = param.data[index]
            with no_grad():
                param.data[index] = original + h
                plus = loss_fn().item()
                param.data[index] = original - h
                minus = loss_fn().item()
            param.data[index] = original
            numeric = (plus - minus) / (2.0 * h)
            error = relative_error(float(analytic[param.name][index]), numeric)
            checked += 1
            if error > worst:
                worst = error
                worst_name = param.name
                worst_index = [int(i) for i in index]

    logger.info(
        f"Gradient check: {checked} coordinates, max relative error "
        f"{worst:.3e} ({worst_name})"
    )
    return GradCheckReport(
        max_relative_error=worst,
        worst_parameter=worst_name,
        worst_index=worst_index,
        coordinates_checked=checked,
        tolerance=tol,
        passed=worst < tol,
    )
