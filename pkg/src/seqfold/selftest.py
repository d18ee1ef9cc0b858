"""Built-in verification suite: numeric invariants and simulator oracles."""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from seqfold.data.trajectory import Trajectory, gt_heatmap, split_samples
from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.settings import ModelSettings, SimSettings
from seqfold.network.encoder import feature_filter
from seqfold.network.model import FoldPolicyNet, HeatmapPair, policy_loss
from seqfold.numeric import (
    Adam,
    GradCheckReport,
    Parameter,
    Tensor,
    bilinear_upsample2x,
    grad_check,
    layer_norm,
    softmax_last_axis,
)
from seqfold.sim.camera import Camera
from seqfold.sim.cloth import ClothState, init_cloth
from seqfold.sim.metrics import mean_particle_distance
from seqfold.sim.primitive import execute_pick_place

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-4
FOLD_TOLERANCE = 0.05  # fraction of the cloth side


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def tiny_config(**overrides: object) -> ModelSettings:
    """The tiny preset at 64-bit, used for gradient checks."""
    return ModelSettings(preset="tiny", dtype="float64", **overrides)


def random_batch(
    config: ModelSettings, rng: np.random.Generator, batch: int = 2
) -> Tuple[np.ndarray, tuple]:
    """Depth frames near the table plus one-hot-ish target maps."""
    frames = config.depth_offset - rng.uniform(
        0.0, 0.02, size=(batch, config.frames, config.H, config.W)
    )
    targets = []
    for _ in range(batch):
        pick = tuple(int(v) for v in rng.integers(0, config.H, size=2))
        place = tuple(int(v) for v in rng.integers(0, config.H, size=2))
        action = PickPlaceAction(pick=pick, place=place)
        targets.append(gt_heatmap(action, config.H, config.W).numpy())
    pick_maps = np.stack([t[0] for t in targets])
    place_maps = np.stack([t[1] for t in targets])
    return frames, (pick_maps, place_maps)


def check_gradients(
    config: Optional[ModelSettings] = None,
    max_coords: Optional[int] = 4,
    seed: int = 0,
) -> GradCheckReport:
    """Finite-difference check of the full loss through ``config``."""
    config = config or tiny_config()
    rng = np.random.default_rng(seed)
    model = FoldPolicyNet(config, seed=seed)
    frames, (pick, place) = random_batch(config, rng)
    target = HeatmapPair(pick=pick, place=place)

    def loss_fn() -> Tensor:
        return policy_loss(model.forward_tensors(frames), target)

    return grad_check(
        loss_fn,
        model.parameters(),
        tol=GRADIENT_TOLERANCE,
        max_coords=max_coords,
        rng=rng,
    )


def _gradient_check() -> CheckResult:
    report = check_gradients()
    return CheckResult(
        "gradients",
        report.passed,
        f"max relative error {report.max_relative_error:.2e} "
        f"({report.worst_parameter})",
    )


def _attention_rows() -> CheckResult:
    config = tiny_config()
    model = FoldPolicyNet(config, seed=1)
    model.trace = {}
    frames, _ = random_batch(config, np.random.default_rng(1), batch=1)
    model.forward(frames[0])
    worst = max(
        float(np.max(np.abs(weights.sum(axis=-1) - 1.0)))
        for weights in model.trace.values()
    )
    return CheckResult(
        "attention rows", worst <= 1e-6, f"max |row sum - 1| = {worst:.1e}"
    )


def _feature_filter() -> CheckResult:
    rng = np.random.default_rng(2)
    z = rng.normal(size=(1, 5, 4, 8))
    perturbed = z.copy()
    perturbed[:, 1:-1] += rng.normal(size=perturbed[:, 1:-1].shape)
    same = np.array_equal(
        feature_filter(Tensor(z)).data,
        feature_filter(Tensor(perturbed)).data,
    )
    return CheckResult(
        "feature filter", same, "middle sub-goal frames do not reach decoders"
    )


def _corner_pixels(
    state: ClothState, camera: Camera, a: int, b: int
) -> PickPlaceAction:
    pick, _ = camera.world_to_pixel(tuple(state.positions[a, :2]))
    place, _ = camera.world_to_pixel(tuple(state.positions[b, :2]))
    return PickPlaceAction(pick=pick, place=place)


def reflected_diagonal_fold(state: ClothState, thickness: float) -> np.ndarray:
    """Ideal result of folding the top-left corner onto bottom-right.

    Particles above the anti-diagonal through the other two corners are
    mirrored across it and stacked one layer up.
    """
    rows, cols = state.rows, state.cols
    r, c = np.divmod(np.arange(state.num_particles), cols)
    u = r / (rows - 1)
    v = c / (cols - 1)
    flip = u + v < 1.0
    u_new = np.where(flip, 1.0 - v, u)
    v_new = np.where(flip, 1.0 - u, v)
    tl, tr, br, bl = (state.positions[i] for i in state.corners)
    origin = tl[:2]
    x_axis = tr[:2] - tl[:2]
    y_axis = bl[:2] - tl[:2]
    xy = origin + v_new[:, None] * x_axis + u_new[:, None] * y_axis
    z = state.radius + np.where(flip, thickness, 0.0)
    return np.column_stack([xy, z])


def diagonal_fold(
    sim: SimSettings, H: int = 64, W: int = 64, side: float = 0.34375
) -> Tuple[ClothState, ClothState, float]:
    """Fold a flat square along its diagonal with the primitive.

    Returns:
        The flat start, the folded result and the MPD in mm against
        the reflected grid
    """
    camera = Camera.from_settings(sim, H, W)
    spec = ClothSpec(
        rows=sim.grid_rows, cols=sim.grid_cols, width=side, height=side
    )
    flat = init_cloth(spec, sim.particle_radius)
    tl, _, br, _ = flat.corners
    action = _corner_pixels(flat, camera, int(tl), int(br))
    folded = execute_pick_place(flat, action, camera, sim).state
    oracle = flat.copy()
    oracle.positions = reflected_diagonal_fold(flat, sim.layer_thickness)
    return flat, folded, mean_particle_distance(folded, oracle)


def _fold_oracle() -> CheckResult:
    sim = SimSettings()
    side = 0.34375
    flat, folded, mpd = diagonal_fold(sim, side=side)
    limit = FOLD_TOLERANCE * side * 1000.0
    stretch = folded.constraint_violation()
    ok = (
        mpd < limit
        and stretch <= sim.stretch_tol
        and folded.num_particles == flat.num_particles
    )
    return CheckResult(
        "diagonal fold",
        ok,
        f"MPD {mpd:.1f} mm (limit {limit:.1f}), stretch {stretch:.3f}",
    )


def _sample_count() -> CheckResult:
    frames = [np.full((8, 8), float(i)) for i in range(9)]
    action = PickPlaceAction(pick=(1, 2), place=(3, 4))
    traj = Trajectory(
        spec=ClothSpec(),
        observations=frames,
        actions=[action] * 8,
        states=[np.zeros((4, 3))] * 9,
    )
    samples = split_samples(traj, 4)
    argmax_ok = all(
        np.unravel_index(np.argmax(s.target_heatmaps.numpy()[0]), (8, 8))
        == s.target_action.pick
        for s in samples
    )
    return CheckResult(
        "sample arithmetic",
        len(samples) == 20 and argmax_ok,
        f"M=8, K=4 gives {len(samples)} samples",
    )


def _softmax_rows() -> CheckResult:
    rng = np.random.default_rng(3)
    x = Tensor(rng.normal(scale=30.0, size=(4, 7, 9)))
    probs = softmax_last_axis(x).data
    worst = float(np.max(np.abs(probs.sum(axis=-1) - 1.0)))
    ok = worst <= 1e-12 and bool(np.all(probs >= 0.0))
    return CheckResult("softmax rows", ok, f"max |row sum - 1| = {worst:.1e}")


def _layer_norm_moments() -> CheckResult:
    rng = np.random.default_rng(4)
    x = Tensor(rng.normal(loc=3.0, scale=5.0, size=(6, 32)))
    out = layer_norm(x, Tensor(np.ones(32)), Tensor(np.zeros(32))).data
    mean_err = float(np.max(np.abs(out.mean(axis=-1))))
    var_err = float(np.max(np.abs(out.var(axis=-1) - 1.0)))
    return CheckResult(
        "layer norm moments",
        mean_err <= 1e-9 and var_err <= 1e-4,
        f"max |mean| {mean_err:.1e}, max |var - 1| {var_err:.1e}",
    )


def _upsample_values() -> CheckResult:
    constant = bilinear_upsample2x(Tensor(np.full((3, 5), 2.5))).data
    ramp = bilinear_upsample2x(Tensor(np.arange(4.0)[None, :])).data
    expected = np.array([0.0, 0.25, 0.75, 1.25, 1.75, 2.25, 2.75, 3.0])
    ok = (
        constant.shape == (6, 10)
        and np.allclose(constant, 2.5)
        and np.allclose(ramp[0], expected)
    )
    return CheckResult(
        "bilinear upsample", ok, "constants stay constant, ramps interpolate"
    )


def _adam_run(seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    param = Parameter("w", rng.normal(size=(3, 4)))
    optimizer = Adam([param], lr=1e-2)
    for _ in range(5):
        param.grad = rng.normal(size=param.data.shape)
        optimizer.step()
    return param.data.copy()


def _adam_determinism() -> CheckResult:
    same = np.array_equal(_adam_run(5), _adam_run(5))
    return CheckResult(
        "adam determinism", same, "equal seeds give bit-identical updates"
    )


CHECKS: List[Callable[[], CheckResult]] = [
    _gradient_check,
    _attention_rows,
    _feature_filter,
    _softmax_rows,
    _layer_norm_moments,
    _upsample_values,
    _adam_determinism,
    _sample_count,
    _fold_oracle,
]


def run_selftest() -> List[CheckResult]:
    """Run every check; failures are reported, not raised."""
    results = []
    for check in CHECKS:
        result = check()
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"{result.name}: {result.detail}")
        results.append(result)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Self-test failed: {', '.join(failed)}")
    return results


def all_passed(results: List[CheckResult]) -> bool:
    return bool(results) and all(r.passed for r in results)
