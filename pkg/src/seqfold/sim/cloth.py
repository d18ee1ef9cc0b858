"""Particle-grid cloth under quasi-static position-based dynamics.

The cloth is a rows x cols grid of particles tied by structural
(grid-neighbor) and shear (diagonal) distance constraints. Folded
layers are kept apart by a per-particle stacking layer: particle ``i``
rests on a floor at ``radius + layers[i] * thickness`` above the table.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from seqfold.models.cloth import ClothSpec
from seqfold.models.settings import SimSettings
from seqfold.utils.exceptions import SimulationError

logger = logging.getLogger(__name__)

CONTACT_TOLERANCE = 0.25  # fraction of the particle radius


@dataclass(frozen=True)
class ClothTopology:
    """Constraint graph shared by every state of one cloth."""

    rows: int
    cols: int
    pairs: np.ndarray  # (m, 2) particle indices
    rest: np.ndarray  # (m,) rest lengths in meters
    colors: List[np.ndarray]  # constraint index sets with no shared particle
    spacing: float  # smallest structural rest length
    size: Tuple[float, float] = (0.0, 0.0)  # flat width, height

    @property
    def num_particles(self) -> int:
        return self.rows * self.cols

    @property
    def corners(self) -> np.ndarray:
        """Indices of the four grid corners, clockwise from row 0, col 0."""
        last = self.num_particles - 1
        return np.array(
            [0, self.cols - 1, last, last - self.cols + 1], dtype=np.int64
        )

    @property
    def diagonal(self) -> float:
        return float(np.hypot(*self.size))

    def grid_coords(self) -> np.ndarray:
        index = np.arange(self.num_particles)
        return np.stack([index // self.cols, index % self.cols], axis=1)


@dataclass
class ClothState:
    """Particle positions (n, 3) in meters plus the shared topology."""

    positions: np.ndarray
    topology: ClothTopology
    radius: float
    layers: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.layers is None:
            self.layers = np.zeros(len(self.positions), dtype=np.int64)

    @property
    def num_particles(self) -> int:
        return int(self.positions.shape[0])

    @property
    def rows(self) -> int:
        return self.topology.rows

    @property
    def cols(self) -> int:
        return self.topology.cols

    @property
    def corners(self) -> np.ndarray:
        return self.topology.corners

    def copy(self) -> "ClothState":
        return ClothState(
            positions=self.positions.copy(),
            topology=self.topology,
            radius=self.radius,
            layers=self.layers.copy(),
        )

    def floors(self, thickness: float) -> np.ndarray:
        """Resting height of every particle center."""
        return self.radius + self.layers * thickness

    def constraint_violation(self) -> float:
        """Max relative deviation of any constraint from its rest length."""
        i, j = self.topology.pairs.T
        delta = self.positions[j] - self.positions[i]
        lengths = np.linalg.norm(delta, axis=1)
        rest = self.topology.rest
        return float(np.max(np.abs(lengths - rest) / rest))


def _color_constraints(pairs: np.ndarray, count: int) -> List[np.ndarray]:
    """Greedy colouring: constraints of one set share no particle."""
    used: List[set] = [set() for _ in range(count)]
    colors: List[int] = []
    for a, b in pairs:
        color = 0
        while color in used[a] or color in used[b]:
            color += 1
        used[a].add(color)
        used[b].add(color)
        colors.append(color)
    labels = np.array(colors)
    return [np.flatnonzero(labels == c) for c in range(labels.max() + 1)]


def _grid_pairs(rows: int, cols: int) -> np.ndarray:
    index = np.arange(rows * cols).reshape(rows, cols)
    pairs = [
        np.stack([index[:, :-1].ravel(), index[:, 1:].ravel()], axis=1),
        np.stack([index[:-1, :].ravel(), index[1:, :].ravel()], axis=1),
        np.stack([index[:-1, :-1].ravel(), index[1:, 1:].ravel()], axis=1),
        np.stack([index[:-1, 1:].ravel(), index[1:, :-1].ravel()], axis=1),
    ]
    return np.concatenate(pairs).astype(np.int64)


def init_cloth(spec: ClothSpec, radius: float = 0.0025) -> ClothState:
    """Build a flat cloth resting on the table.

    Particle (r, c) sits at local x = (c / (cols-1) - 1/2) * width and
    y = (1/2 - r / (rows-1)) * height, rotated by ``spec.rotation`` about
    ``spec.center``, at height ``radius``. Rest lengths come from this
    geometry.

    Raises:
        SimulationError: If the spec gives a degenerate grid
    """
    dx = spec.width / (spec.cols - 1)
    dy = spec.height / (spec.rows - 1)
    if not np.isfinite(spec.rotation) or min(dx, dy) <= 2 * radius:
        raise SimulationError(
            "Degenerate cloth spec",
            detail=f"spacing {dx:.4f}x{dy:.4f} m with radius {radius} m",
        )
    r, c = np.meshgrid(
        np.arange(spec.rows), np.arange(spec.cols), indexing="ij"
    )
    local_x = (c.ravel() / (spec.cols - 1) - 0.5) * spec.width
    local_y = (0.5 - r.ravel() / (spec.rows - 1)) * spec.height
    cos, sin = np.cos(spec.rotation), np.sin(spec.rotation)
    positions = np.stack(
        [
            spec.center[0] + cos * local_x - sin * local_y,
            spec.center[1] + sin * local_x + cos * local_y,
            np.full(local_x.shape, radius),
        ],
        axis=1,
    )
    pairs = _grid_pairs(spec.rows, spec.cols)
    edges = positions[pairs[:, 1]] - positions[pairs[:, 0]]
    rest = np.linalg.norm(edges, axis=1)
    topology = ClothTopology(
        rows=spec.rows,
        cols=spec.cols,
        pairs=pairs,
        rest=rest,
        colors=_color_constraints(pairs, spec.rows * spec.cols),
        spacing=float(min(dx, dy)),
        size=(spec.width, spec.height),
    )
    return ClothState(positions=positions, topology=topology, radius=radius)


def pbd_solve(
    state: ClothState,
    pinned: Optional[Sequence[int]],
    iterations: int,
    sim: SimSettings,
    gravity: bool = True,
    friction: bool = True,
) -> float:
    """Project all distance constraints in place.

    Each iteration moves free particles down by the gravity step, runs
    one Gauss-Seidel sweep (colour set by colour set), then lifts any
    particle below its floor back onto it. With ``friction`` on,
    particles resting on their floor move sideways by only
    ``sim.contact_mobility`` of their correction. Pinned particles never
    move. Coincident pairs are pushed apart vertically.

    Args:
        state: Cloth to solve, modified in place
        pinned: Indices of particles that stay fixed
        iterations: Number of sweeps, at least 1
        sim: Simulator settings
        gravity: Whether to apply the gravity step
        friction: Whether resting particles resist sideways motion

    Returns:
        float: Max relative constraint violation after solving
    """
    if iterations < 1:
        raise SimulationError(f"iterations must be >= 1, got {iterations}")
    pos = state.positions
    topo = state.topology
    free = np.ones(state.num_particles, dtype=bool)
    if pinned is not None and len(pinned):
        free[np.asarray(pinned, dtype=np.int64)] = False
    inv_mass = free.astype(np.float64)
    floors = state.floors(sim.layer_thickness)
    contact = CONTACT_TOLERANCE * state.radius
    mobility = np.ones(state.num_particles)

    for _ in range(iterations):
        if gravity and sim.gravity_step > 0:
            pos[free, 2] -= sim.gravity_step
        if friction:
            resting = free & (pos[:, 2] <= floors + contact)
            mobility = np.where(resting, sim.contact_mobility, 1.0)
        for color in topo.colors:
            i, j = topo.pairs[color, 0], topo.pairs[color, 1]
            delta = pos[j] - pos[i]
            length = np.linalg.norm(delta, axis=1)
            up = np.zeros_like(delta)
            up[:, 2] = 1.0
            direction = np.divide(
                delta, length[:, None], out=up, where=length[:, None] > 1e-12
            )
            wsum = inv_mass[i] + inv_mass[j]
            error = np.divide(
                length - topo.rest[color],
                wsum,
                out=np.zeros_like(length),
                where=wsum > 0,
            )
            corr = error[:, None] * direction
            move_i = inv_mass[i, None] * corr
            move_j = -inv_mass[j, None] * corr
            move_i[:, :2] *= mobility[i, None]
            move_j[:, :2] *= mobility[j, None]
            pos[i] += move_i
            pos[j] += move_j
        below = free & (pos[:, 2] < floors)
        pos[below, 2] = floors[below]

    residual = state.constraint_violation()
    if residual > sim.stretch_tol:
        logger.debug(
            f"PBD residual {residual:.3f} above tolerance {sim.stretch_tol}"
        )
    return residual


def settle(state: ClothState, sim: SimSettings) -> float:
    """Let a released cloth fall onto its floors, then relax it.

    Gravity runs for ``sim.settle_iterations`` sweeps. While the stretch
    is above ``sim.stretch_tol``, further frictionless sweeps without
    gravity follow, at most ``sim.relax_rounds`` rounds of the same
    length.

    Returns:
        float: Max relative constraint violation of the settled cloth

    Raises:
        SimulationError: If the cloth is still over-stretched after the
            last relaxation round
    """
    residual = pbd_solve(state, None, sim.settle_iterations, sim)
    rounds = 0
    while residual > sim.stretch_tol and rounds < sim.relax_rounds:
        residual = pbd_solve(
            state,
            None,
            sim.settle_iterations,
            sim,
            gravity=False,
            friction=False,
        )
        rounds += 1
    if residual > sim.stretch_tol:
        raise SimulationError(
            "Cloth did not relax to the stretch tolerance",
            detail=f"violation {residual:.3f} > {sim.stretch_tol} after "
            f"{rounds} relaxation rounds",
        )
    if rounds:
        logger.debug(f"Relaxed in {rounds} rounds to {residual:.4f}")
    return residual


def assign_layers(
    state: ClothState, lifted: np.ndarray, contact_radius: float
) -> None:
    """Recompute stacking layers after a pick-and-place.

    Particles are placed in solve order: those that stayed down, lowest
    layer first, then the lifted ones in reverse layer order (a flipped
    flap lands upside down). Each particle rests one layer above the
    highest already-placed particle within ``contact_radius`` in xy,
    ignoring its own grid neighborhood (Chebyshev distance <= 2).
    """
    old = state.layers
    groups = [
        np.flatnonzero(~lifted & (old == layer))
        for layer in np.unique(old[~lifted])
    ] + [
        np.flatnonzero(lifted & (old == layer))
        for layer in np.unique(old[lifted])[::-1]
    ]
    xy = state.positions[:, :2]
    grid = state.topology.grid_coords()
    new = np.full(state.num_particles, -1, dtype=np.int64)
    for group in groups:
        if group.size == 0:
            continue
        placed = np.flatnonzero(new >= 0)
        if placed.size == 0:
            new[group] = 0
            continue
        offsets = xy[group, None, :] - xy[None, placed, :]
        dist = np.linalg.norm(offsets, axis=2)
        grid_gap = np.abs(grid[group, None, :] - grid[None, placed, :]).max(
            axis=2
        )
        touching = (dist <= contact_radius) & (grid_gap > 2)
        support = np.where(touching, new[placed][None, :] + 1, 0)
        new[group] = support.max(axis=1)
    state.layers = new
