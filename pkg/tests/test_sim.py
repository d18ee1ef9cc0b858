"""Tests for the cloth simulator, camera, renderer and metrics."""

import math
from unittest.mock import patch

import numpy as np
import pytest

from seqfold.data.actions import RandomActionSampler
from seqfold.data.trajectory import collect_trajectory
from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.settings import SimSettings
from seqfold.selftest import diagonal_fold
from seqfold.sim import (
    Camera,
    carry_plan,
    execute_pick_place,
    grasp_select,
    gripper_path,
    init_cloth,
    mean_particle_distance,
    miou,
    pbd_solve,
    render,
    settle,
    splat_radius,
)
from seqfold.sim.primitive import VERTICAL_STEPS
from seqfold.utils.exceptions import NoGraspError, SimulationError


def test_small_grid_constraints():
    """Test a 2x2 cloth has four structural and two shear constraints."""
    state = init_cloth(ClothSpec(rows=2, cols=2, width=0.1, height=0.1))
    rest = np.sort(state.topology.rest)

    assert len(state.topology.pairs) == 6
    assert np.allclose(rest[:4], 0.1)
    assert np.allclose(rest[4:], 0.1 * math.sqrt(2))
    assert state.constraint_violation() == pytest.approx(0.0)


def test_flat_cloth_bounding_box():
    """Test the flat cloth spans width x height around its center."""
    spec = ClothSpec(width=0.3, height=0.2, center=(0.05, -0.02))
    state = init_cloth(spec, radius=0.0025)
    xy = state.positions[:, :2]

    assert np.allclose(xy.min(axis=0), [-0.10, -0.12])
    assert np.allclose(xy.max(axis=0), [0.20, 0.08])
    assert np.allclose(state.positions[:, 2], 0.0025)
    assert state.topology.size == (0.3, 0.2)


def test_rotated_cloth_corners():
    """Test a quarter-pi rotation puts the corners on the axes."""
    side = 0.2
    spec = ClothSpec(width=side, height=side, rotation=math.pi / 4)
    state = init_cloth(spec)
    half_diagonal = side / math.sqrt(2)

    top_left = state.positions[state.corners[0], :2]
    top_right = state.positions[state.corners[1], :2]

    assert np.allclose(top_left, [-half_diagonal, 0.0], atol=1e-12)
    assert np.allclose(top_right, [0.0, half_diagonal], atol=1e-12)


def test_degenerate_spec():
    """Test particles that would overlap are rejected."""
    with pytest.raises(SimulationError, match="Degenerate"):
        init_cloth(ClothSpec(width=0.05, height=0.05), radius=0.0025)


def test_pbd_restores_stretched_cloth():
    """Test a uniformly stretched cloth contracts back to rest."""
    sim = SimSettings(contact_mobility=1.0)
    state = init_cloth(ClothSpec(rows=2, cols=2, width=0.1, height=0.1))
    state.positions[:, :2] *= 2.0

    residual = pbd_solve(state, None, 200, sim, gravity=False)

    assert residual < 1e-4
    assert np.allclose(state.positions[:, :2].mean(axis=0), 0.0)


def test_pbd_pinned_particle_stays():
    """Test pinned particles never move while the rest relax."""
    sim = SimSettings(contact_mobility=1.0)
    state = init_cloth(ClothSpec(rows=2, cols=2, width=0.1, height=0.1))
    state.positions[:, :2] *= 2.0
    pinned = state.positions[0].copy()

    residual = pbd_solve(state, [0], 200, sim, gravity=False)

    assert np.array_equal(state.positions[0], pinned)
    assert residual < 1e-4


def test_pbd_keeps_particles_above_floor():
    """Test gravity never pushes a particle below the table."""
    sim = SimSettings()
    state = init_cloth(ClothSpec(rows=5, cols=5))
    state.positions[:, 2] += 0.01

    pbd_solve(state, None, 50, sim)

    assert np.all(state.positions[:, 2] >= state.radius - 1e-12)


def test_pbd_needs_an_iteration():
    """Test zero iterations is a usage error."""
    state = init_cloth(ClothSpec(rows=3, cols=3))

    with pytest.raises(SimulationError):
        pbd_solve(state, None, 0, SimSettings())


def test_camera_pixel_round_trip():
    """Test a pixel center maps back to the same pixel."""
    camera = Camera(extent=0.6, H=64, W=64)

    xy = camera.pixel_to_world((10, 50))
    pixel, inside = camera.world_to_pixel(xy)

    assert pixel == (10, 50)
    assert inside


def test_camera_orientation_and_clamping():
    """Test row 0 is the +y edge and outside points clamp."""
    camera = Camera(extent=0.6, H=64, W=64)

    top_left, inside = camera.world_to_pixel((-0.295, 0.295))
    far, far_inside = camera.world_to_pixel((5.0, -5.0))

    assert top_left == (0, 0) and inside
    assert far == (63, 63) and not far_inside


def test_render_flat_cloth():
    """Test depth and mask of a flat cloth seen from above."""
    camera = Camera(extent=0.6, height=1.0, H=64, W=64)
    state = init_cloth(ClothSpec(width=0.3, height=0.3))

    depth, mask = render(state, camera)

    covered = mask.sum() * camera.pixel_width * camera.pixel_height
    assert covered == pytest.approx(0.09, rel=0.2)
    assert np.allclose(depth[mask], 1.0 - state.radius)
    assert np.all(depth[~mask] == 1.0)
    assert not mask[0, 0]
    assert mask[32, 32]


def test_splat_radius_follows_spacing():
    """Test the default disk scales with grid spacing."""
    state = init_cloth(ClothSpec(rows=11, cols=11, width=0.2, height=0.2))

    assert splat_radius(state) == pytest.approx(0.75 * 0.02)
    assert splat_radius(state, 0.004) == 0.004


def test_mean_particle_distance():
    """Test MPD is the mean displacement in millimeters."""
    a = init_cloth(ClothSpec(rows=4, cols=4))
    b = a.copy()
    b.positions[:, 0] += 0.01

    assert mean_particle_distance(a, a) == 0.0
    assert mean_particle_distance(a, b) == pytest.approx(10.0)


def test_mean_particle_distance_grid_mismatch():
    """Test states of different grids cannot be compared."""
    a = init_cloth(ClothSpec(rows=4, cols=4))
    b = init_cloth(ClothSpec(rows=5, cols=5))

    with pytest.raises(SimulationError):
        mean_particle_distance(a, b)


def test_miou():
    """Test IoU of overlapping, disjoint and empty masks."""
    left = np.zeros((4, 4), dtype=bool)
    left[:, :2] = True
    middle = np.zeros((4, 4), dtype=bool)
    middle[:, 1:3] = True
    empty = np.zeros((4, 4), dtype=bool)

    assert miou(left, left) == 1.0
    assert miou(left, middle) == pytest.approx(1.0 / 3.0)
    assert miou(left, ~left) == 0.0
    assert miou(empty, empty) == 1.0


def test_gripper_path_profile():
    """Test lift, carry and lower phases of the trapezoid."""
    sim = SimSettings(n_waypoints=10)
    start_z = sim.particle_radius

    path = gripper_path(start_z, np.array([0.1, -0.05]), sim)

    assert len(path) == 2 * VERTICAL_STEPS + 10
    assert path[VERTICAL_STEPS - 1][2] == pytest.approx(sim.lift_height)
    assert np.allclose(path[-1][:2], [0.1, -0.05])
    assert start_z + path[-1][2] == pytest.approx(
        sim.particle_radius + sim.layer_thickness
    )


def test_grasp_takes_top_layer_only():
    """Test the grasp ignores particles below the top of the stack."""
    camera = Camera(extent=0.6, H=64, W=64)
    state = init_cloth(ClothSpec(rows=5, cols=5, width=0.1, height=0.1))
    center = 12
    state.positions[center, 2] += 0.01

    pixel, _ = camera.world_to_pixel((0.0, 0.0))

    grasped = grasp_select(state, pixel, camera, radius=0.03)

    assert grasped.tolist() == [center]


def test_grasp_on_background():
    """Test picking bare table raises NoGraspError."""
    camera = Camera(extent=0.6, H=64, W=64)
    state = init_cloth(ClothSpec(width=0.2, height=0.2))

    with pytest.raises(NoGraspError):
        grasp_select(state, (0, 0), camera, radius=0.01)


def test_pick_on_background_is_a_noop():
    """Test the primitive reports an empty grasp and keeps the cloth."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    state = init_cloth(ClothSpec())
    action = PickPlaceAction(pick=(0, 0), place=(32, 32))

    result = execute_pick_place(state, action, camera, sim)

    assert not result.grasped
    assert np.array_equal(result.state.positions, state.positions)


def test_pick_outside_image():
    """Test pixels outside the image are rejected."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    action = PickPlaceAction(pick=(70, 3), place=(10, 10))

    with pytest.raises(SimulationError, match="outside"):
        execute_pick_place(init_cloth(ClothSpec()), action, camera, sim)


def test_pick_equals_place_leaves_cloth_in_place():
    """Test lifting a corner and putting it back changes little."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    state = init_cloth(ClothSpec(), sim.particle_radius)
    corner, _ = camera.world_to_pixel(
        tuple(state.positions[state.corners[0], :2])
    )

    result = execute_pick_place(
        state, PickPlaceAction(pick=corner, place=corner), camera, sim
    )

    assert result.grasped
    assert result.state.num_particles == state.num_particles
    assert np.all(np.isfinite(result.state.positions))
    assert mean_particle_distance(result.state, state) < 10.0


def test_input_state_is_not_modified():
    """Test the primitive works on a copy."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    state = init_cloth(ClothSpec(), sim.particle_radius)
    before = state.positions.copy()
    corner, _ = camera.world_to_pixel(
        tuple(state.positions[state.corners[0], :2])
    )

    execute_pick_place(
        state, PickPlaceAction(pick=corner, place=(32, 32)), camera, sim
    )

    assert np.array_equal(state.positions, before)


def test_diagonal_fold_matches_reflection():
    """Test folding a corner onto its opposite gives a folded triangle."""
    sim = SimSettings()
    side = 0.34375

    flat, folded, mpd = diagonal_fold(sim, side=side)

    assert mpd < 0.05 * side * 1000.0
    assert folded.num_particles == flat.num_particles
    assert folded.constraint_violation() <= sim.stretch_tol
    # the flap lands on top of the cloth
    assert folded.layers.max() >= 1


def test_pbd_separates_coincident_particles():
    """Test a pair sitting on top of each other is pushed apart upwards."""
    sim = SimSettings()
    state = init_cloth(ClothSpec(rows=2, cols=2, width=0.1, height=0.1))
    state.positions[3] = state.positions[0]

    pbd_solve(state, [0, 1, 2], 1, sim, gravity=False)

    assert np.all(np.isfinite(state.positions))
    assert state.positions[3, 2] > state.radius


def test_settle_relaxes_a_displaced_particle():
    """Test settling brings a dragged particle back within tolerance."""
    sim = SimSettings()
    state = init_cloth(ClothSpec(rows=5, cols=5, width=0.2, height=0.2))
    state.positions[12, :2] += 0.03

    residual = settle(state, sim)

    assert residual <= sim.stretch_tol
    assert state.constraint_violation() <= sim.stretch_tol


def test_settle_raises_when_stretch_persists():
    """Test a cloth that will not relax is a simulation error."""
    sim = SimSettings(relax_rounds=3)
    state = init_cloth(ClothSpec(rows=3, cols=3))

    with patch("seqfold.sim.cloth.pbd_solve", return_value=0.5) as solve:
        with pytest.raises(SimulationError, match="stretch tolerance"):
            settle(state, sim)

    assert solve.call_count == 4


def test_carry_turns_the_pick_side_over():
    """Test a corner carried onto the opposite corner turns the flap."""
    sim = SimSettings()
    state = init_cloth(ClothSpec(rows=5, cols=5, width=0.2, height=0.2))
    top_left, _, bottom_right, _ = state.corners
    handle = state.positions[top_left, :2]
    target = state.positions[bottom_right, :2]

    carry = carry_plan(state, handle, target - handle, sim)

    assert carry.is_fold
    assert top_left in carry.indices
    assert bottom_right not in carry.indices
    corner = int(np.flatnonzero(carry.indices == top_left)[0])
    halfway = carry.positions(0.5)[corner]
    assert np.allclose(halfway[:2], 0.0, atol=1e-9)
    assert halfway[2] == pytest.approx(
        sim.particle_radius + 0.1 * math.sqrt(2)
    )
    assert np.allclose(carry.positions(1.0)[corner, :2], target)


def test_carry_drags_when_nothing_lies_beyond_the_fold():
    """Test pulling a corner outwards slides the whole cloth."""
    sim = SimSettings()
    state = init_cloth(ClothSpec(rows=5, cols=5, width=0.2, height=0.2))
    handle = state.positions[state.corners[0], :2]
    outward = np.array([-0.05, 0.05])

    carry = carry_plan(state, handle, outward, sim)

    assert not carry.is_fold
    assert carry.indices.size == state.num_particles
    moved = carry.positions(1.0)
    assert np.allclose(moved[:, :2], state.positions[:, :2] + outward)
    assert np.allclose(moved[:, 2], state.positions[:, 2])


def test_carry_without_displacement():
    """Test a pick placed where it was taken carries nothing."""
    state = init_cloth(ClothSpec(rows=3, cols=3))
    handle = state.positions[0, :2]

    assert carry_plan(state, handle, np.zeros(2), SimSettings()) is None


def test_corner_fold_respects_stretch_tolerance():
    """Test a released fold is relaxed below the stretch tolerance."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    state = init_cloth(ClothSpec(), sim.particle_radius)
    corner, _ = camera.world_to_pixel(
        tuple(state.positions[state.corners[0], :2])
    )

    result = execute_pick_place(
        state, PickPlaceAction(pick=corner, place=(32, 32)), camera, sim
    )

    assert result.residual <= sim.stretch_tol
    assert result.state.constraint_violation() <= sim.stretch_tol
    assert result.state.layers.max() >= 1


@pytest.mark.slow
def test_random_episodes_keep_particles_and_lengths(small_config):
    """Test 100 random episodes keep every particle and stay unstretched."""
    sim = small_config.sim
    camera = Camera.from_settings(
        sim, small_config.model.H, small_config.model.W
    )
    sampler = RandomActionSampler(camera, small_config.data)
    count = sim.grid_rows * sim.grid_cols

    for seed in range(100):
        rng = np.random.default_rng(seed)
        spec = ClothSpec(
            rows=sim.grid_rows,
            cols=sim.grid_cols,
            rotation=float(rng.uniform(0.0, math.pi)),
        )
        traj = collect_trajectory(sampler, spec, 8, rng, camera, sim)

        assert all(len(positions) == count for positions in traj.states)
        assert traj.final_state.num_particles == count
        assert traj.final_state.constraint_violation() <= sim.stretch_tol
