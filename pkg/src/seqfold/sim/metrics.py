"""Cloth-state comparison metrics."""

import numpy as np

from seqfold.sim.cloth import ClothState
from seqfold.utils.exceptions import SimulationError


def mean_particle_distance(a: ClothState, b: ClothState) -> float:
    """Mean 3-D distance between corresponding particles, in millimeters.

    Raises:
        SimulationError: If the two states have different grids
    """
    if (a.rows, a.cols) != (b.rows, b.cols):
        raise SimulationError(
            "Cannot compare cloth states with different topologies",
            detail=f"{a.rows}x{a.cols} vs {b.rows}x{b.cols}",
        )
    distance = np.linalg.norm(a.positions - b.positions, axis=1)
    return float(distance.mean() * 1000.0)


def miou(achieved: np.ndarray, reference: np.ndarray) -> float:
    """Intersection over union of two boolean masks; 1.0 if both empty."""
    if achieved.shape != reference.shape:
        raise SimulationError(
            "Mask shapes differ",
            detail=f"{achieved.shape} vs {reference.shape}",
        )
    union = np.logical_or(achieved, reference).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(achieved, reference).sum() / union)
