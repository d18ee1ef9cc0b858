"""Tests for actions, demonstrations, samples and dataset storage."""

import math

import numpy as np
import pytest

from seqfold.data import (
    TASK_SCRIPTS,
    RandomActionSampler,
    Trajectory,
    collect_demo,
    collect_trajectory,
    demo_samples,
    generate_demo_dataset,
    generate_random_dataset,
    get_task_script,
    gt_heatmap,
    load_dataset,
    random_action,
    random_spec,
    scripted_demo,
    split_samples,
)
from seqfold.data.storage import MANIFEST
from seqfold.data.trajectory import default_sigma
from seqfold.models.cloth import ClothSpec, PickPlaceAction
from seqfold.models.settings import DataSettings, SimSettings, TaskId
from seqfold.sim import Camera, init_cloth, render_mask
from seqfold.utils.exceptions import ConfigError, DatasetError, DimensionError
from seqfold.utils.file_utils import read_json, write_json


def _toy_trajectory(actions=8, size=8):
    frames = [np.full((size, size), float(i)) for i in range(actions + 1)]
    steps = [
        PickPlaceAction(pick=(i % size, 1), place=(2, i % size))
        for i in range(actions)
    ]
    return Trajectory(
        spec=ClothSpec(),
        observations=frames,
        actions=steps,
        states=[np.zeros((4, 3))] * (actions + 1),
    )


def test_random_spec_ranges():
    """Test sizes and rotations come from the configured ranges."""
    data = DataSettings(rect_probability=0.5, rotations_deg=[0.0, 45.0])
    rng = np.random.default_rng(0)

    specs = [random_spec(data, SimSettings(), rng) for _ in range(200)]

    assert all(0.3125 <= s.width <= 0.36875 for s in specs)
    assert {round(math.degrees(s.rotation)) for s in specs} == {0, 45}
    assert any(s.height < s.width for s in specs)
    assert any(s.height == s.width for s in specs)


def test_corner_bias_fraction():
    """Test about 80% of random picks target a corner."""
    camera = Camera(extent=0.6, H=32, W=32)
    state = init_cloth(ClothSpec(rows=9, cols=9))
    sampler = RandomActionSampler(camera, DataSettings(corner_bias=0.8))
    rng = np.random.default_rng(0)

    for _ in range(10_000):
        sampler(state, rng)

    assert sampler.total == 10_000
    assert 0.78 <= sampler.corner_fraction <= 0.82


def test_random_picks_land_on_cloth():
    """Test every pick pixel is covered by the cloth mask."""
    camera = Camera(extent=0.6, H=32, W=32)
    state = init_cloth(ClothSpec(rows=9, cols=9, rotation=0.5))
    mask = render_mask(state, camera)
    sampler = RandomActionSampler(camera)
    rng = np.random.default_rng(1)

    for _ in range(200):
        action = sampler(state, rng)
        assert mask[action.pick]
        assert 0 <= action.place[0] < 32 and 0 <= action.place[1] < 32


def test_random_action_is_seeded():
    """Test the same generator state gives the same action."""
    camera = Camera(extent=0.6, H=32, W=32)
    state = init_cloth(ClothSpec(rows=9, cols=9))

    a = random_action(state, camera, np.random.default_rng(5))
    b = random_action(state, camera, np.random.default_rng(5))

    assert a == b


def test_collect_random_trajectory():
    """Test a random trajectory records one frame and state per step."""
    sim = SimSettings(grid_rows=9, grid_cols=9, iterations=10)
    camera = Camera.from_settings(sim, 32, 32)
    sampler = RandomActionSampler(camera)
    spec = ClothSpec(rows=9, cols=9)

    traj = collect_trajectory(
        sampler, spec, 3, np.random.default_rng(0), camera, sim
    )

    assert traj.num_actions == 3
    assert len(traj.observations) == 4
    assert traj.observations[0].shape == (32, 32)
    assert len(traj.states) == 4
    assert sampler.total == 3


def test_trajectory_needs_one_more_observation():
    """Test observation and action counts must line up."""
    with pytest.raises(DimensionError):
        Trajectory(
            spec=ClothSpec(),
            observations=[np.zeros((4, 4))] * 3,
            actions=[PickPlaceAction(pick=(0, 0), place=(1, 1))] * 3,
            states=[np.zeros((4, 3))] * 3,
        )


def test_sample_count():
    """Test a length-8 trajectory with K=4 gives (8 - 4 + 1) * 4 samples."""
    samples = split_samples(_toy_trajectory(8), 4)

    assert len(samples) == 20
    assert all(len(s.subgoals) == 5 for s in samples)


def test_sample_contents():
    """Test current frame, sub-goals and target line up with indices."""
    traj = _toy_trajectory(8)

    samples = split_samples(traj, 4)

    for s in samples:
        i, j = s.start_index, s.step_index
        assert s.current[0, 0] == float(i + j)
        assert s.subgoals[0][0, 0] == float(i)
        assert s.subgoals[-1][0, 0] == float(i + 4)
        assert s.target_action == traj.actions[i + j]
        assert s.next_frame[0, 0] == float(i + j + 1)
        if j == 0:
            assert np.array_equal(s.current, s.subgoals[0])


def test_short_trajectory_gives_no_samples():
    """Test trajectories shorter than K are skipped."""
    assert split_samples(_toy_trajectory(2), 4) == []


def test_short_demo_is_padded():
    """Test a two-step demo yields two samples with a repeated goal."""
    traj = _toy_trajectory(2)

    samples = demo_samples(traj, 4)

    assert len(samples) == 2
    goals = [f[0, 0] for f in samples[0].subgoals]
    assert goals == [0.0, 1.0, 2.0, 2.0, 2.0]


def test_target_heatmap_values():
    """Test peak, 3-sigma value and zeroed tail of a target map."""
    action = PickPlaceAction(pick=(20, 20), place=(40, 10))
    sigma = default_sigma(64)

    pick, place = gt_heatmap(action, 64, 64).numpy()

    assert sigma == 2.0
    assert pick[20, 20] == 1.0
    assert place[40, 10] == 1.0
    assert pick[26, 20] == pytest.approx(math.exp(-4.5), rel=1e-6)
    assert pick[26, 20] == pytest.approx(0.011, abs=1e-3)
    assert pick[60, 60] == 0.0


def test_target_heatmap_outside_image():
    """Test an action pixel outside the image is rejected."""
    action = PickPlaceAction(pick=(64, 0), place=(0, 0))

    with pytest.raises(DimensionError):
        gt_heatmap(action, 64, 64)


def test_unknown_task():
    """Test an unknown task id is a configuration error."""
    with pytest.raises(ConfigError, match="Unknown task"):
        get_task_script("FoldInHalf")


@pytest.mark.parametrize(
    "task, count",
    [
        (TaskId.DOUBLE_TRIANGLE, 2),
        (TaskId.DOUBLE_STRAIGHT, 3),
        (TaskId.ALL_CORNERS_INWARD, 4),
        (TaskId.CORNERS_EDGES_INWARD, 4),
    ],
)
def test_demo_action_counts(task, count):
    """Test each task's demonstrator takes its fixed number of actions."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    script = get_task_script(task)

    traj = collect_demo(script, script.canonical_spec(sim), camera, sim)

    assert traj.num_actions == count
    assert len(traj.observations) == count + 1
    assert all(traj.executed)
    flat = render_mask(init_cloth(traj.spec, sim.particle_radius), camera)
    folded = render_mask(traj.final_state, camera)
    assert folded.sum() < flat.sum()


def test_scripted_demo_matches_recorded_demo():
    """Test the planned actions are the ones a recorded demo executes."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    script = get_task_script(TaskId.ALL_CORNERS_INWARD)
    spec = script.canonical_spec(sim)

    actions = scripted_demo(
        script, init_cloth(spec, sim.particle_radius), camera, sim
    )

    assert actions == collect_demo(script, spec, camera, sim).actions


@pytest.mark.parametrize("task", list(TASK_SCRIPTS))
def test_demo_halves_the_footprint(task):
    """Test every finished demo covers at most 0.55 of the flat footprint."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    script = get_task_script(task)

    traj = collect_demo(script, script.canonical_spec(sim), camera, sim)

    flat = render_mask(init_cloth(traj.spec, sim.particle_radius), camera)
    folded = render_mask(traj.final_state, camera)
    assert folded.sum() <= 0.55 * flat.sum()


def test_double_straight_folds_the_strip_at_its_folded_edge():
    """Test the third fold picks the crease midpoint."""
    sim = SimSettings(grid_rows=9, grid_cols=9)
    script = get_task_script(TaskId.DOUBLE_STRAIGHT)
    state = init_cloth(script.canonical_spec(sim), sim.particle_radius)
    center = state.positions[:, :2].mean(axis=0)

    pick, place = script.planner(state, 2, center)

    assert np.allclose(pick, state.positions[4 * 9 + 4, :2])
    assert np.allclose(place, state.positions[8 * 9 + 4, :2])


def test_all_corners_inward_gathers_corners():
    """Test every corner ends near the initial cloth center."""
    sim = SimSettings()
    camera = Camera.from_settings(sim, 64, 64)
    script = get_task_script(TaskId.ALL_CORNERS_INWARD)

    traj = collect_demo(script, script.canonical_spec(sim), camera, sim)

    start = init_cloth(traj.spec, sim.particle_radius)
    center = start.positions[:, :2].mean(axis=0)
    corners = traj.final_state.corners
    before = np.linalg.norm(start.positions[corners, :2] - center, axis=1)
    after = np.linalg.norm(
        traj.final_state.positions[corners, :2] - center, axis=1
    )
    assert np.all(after < 0.5 * before)


def test_dataset_round_trip(tmp_path, small_config):
    """Test stored trajectories read back as written (float32 frames)."""
    manifest = generate_random_dataset(small_config, tmp_path / "random")

    dataset = load_dataset(tmp_path / "random")

    assert len(dataset) == 2
    assert dataset.manifest.kind == "random"
    assert manifest.counts["actions"] == 6
    traj = dataset.trajectory(0)
    assert traj.num_actions == 3
    assert traj.observations[0].shape == (32, 32)
    assert traj.states[0].shape == (81, 3)
    assert len(dataset.samples(K=2)) == 2 * (3 - 2 + 1) * 2


def test_dataset_generation_is_deterministic(tmp_path, small_config):
    """Test the same seeds give byte-identical frames."""
    generate_random_dataset(small_config, tmp_path / "a")
    generate_random_dataset(small_config, tmp_path / "b")

    for name in ("obs_003.f32", "states_003.f32", "actions.json"):
        a = (tmp_path / "a" / "traj_00001" / name).read_bytes()
        b = (tmp_path / "b" / "traj_00001" / name).read_bytes()
        assert a == b


def test_truncated_file_is_named(tmp_path, small_config):
    """Test a truncated frame fails loading and names the file."""
    generate_random_dataset(small_config, tmp_path)
    frame = tmp_path / "traj_00000" / "obs_001.f32"
    frame.write_bytes(frame.read_bytes()[:-4])

    with pytest.raises(DatasetError) as exc_info:
        load_dataset(tmp_path)

    assert "obs_001.f32" in str(exc_info.value)


def test_missing_file_is_named(tmp_path, small_config):
    """Test a deleted file fails loading and names the file."""
    generate_random_dataset(small_config, tmp_path)
    (tmp_path / "traj_00001" / "actions.json").unlink()

    with pytest.raises(DatasetError, match="Missing dataset file"):
        load_dataset(tmp_path)


def test_unsupported_version(tmp_path, small_config):
    """Test a manifest from another format version is rejected."""
    generate_random_dataset(small_config, tmp_path)
    raw = read_json(tmp_path / MANIFEST)
    raw["version"] = 99
    write_json(tmp_path / MANIFEST, raw)

    with pytest.raises(DatasetError, match="Unsupported dataset version"):
        load_dataset(tmp_path)


def test_demo_dataset(tmp_path, small_config):
    """Test demo datasets record their task and pad into samples."""
    generate_demo_dataset(
        small_config, TaskId.DOUBLE_TRIANGLE, tmp_path / "demo"
    )

    dataset = load_dataset(tmp_path / "demo")

    assert dataset.manifest.task == "DoubleTriangle"
    assert dataset.trajectory(0).num_actions == 2
    samples = dataset.samples(K=4, pad_short=True)
    assert len(samples) == 2
    assert len(samples[0].subgoals) == 5
