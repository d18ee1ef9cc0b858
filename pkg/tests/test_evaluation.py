"""Tests for the evaluation grid, episodes and report files."""

import json

import numpy as np
import pytest

from seqfold.data.demos import get_task_script
from seqfold.models.report import EPISODE_COLUMNS, EpisodeRow, EvalReport
from seqfold.models.settings import EvalSettings, TaskId
from seqfold.network import FoldPolicyNet
from seqfold.training import (
    GridPoint,
    compare_to_untrained,
    config_grid,
    evaluate,
    read_episodes,
    rollout_episode,
    write_report,
)
from seqfold.training.evaluation import _canonical
from seqfold.training.report import depth_to_image


def _with_eval(config, **updates):
    return config.model_copy(
        update={"eval": config.eval.model_copy(update=updates)}
    )


def test_grid_sizes():
    """Test the fixed grids and the configurable desk grid."""
    fine = config_grid(EvalSettings(grid="fine"))
    real = config_grid(EvalSettings(grid="real"))
    desk = config_grid(
        EvalSettings(size_factors=[0.9, 1.1], rotations_deg=[0.0])
    )

    assert len(fine) == 40
    assert len(real) == 9
    assert real.canonical_side == pytest.approx(0.30)
    assert [p.size_factor for p in desk.points] == [0.9, 1.1]


def test_fine_grid_rectangle_sizes(small_config):
    """Test fine-grid rectangles span 27.5-32.5 cm in height."""
    config = _with_eval(small_config, grid="fine")
    grid = config_grid(config.eval)
    points = [p for p in grid.points if p.rotation_deg == 0.0]
    rect = get_task_script(TaskId.DOUBLE_STRAIGHT)
    square = get_task_script(TaskId.DOUBLE_TRIANGLE)

    rects = [_canonical(rect, config, grid, p) for p in points]
    squares = [_canonical(square, config, grid, p) for p in points]

    assert len(rects) == 10
    assert rects[0].width == pytest.approx(0.3125)
    assert rects[0].height == pytest.approx(0.275)
    assert rects[-1].width == pytest.approx(0.36875)
    assert rects[-1].height == pytest.approx(0.325)
    assert all(s.width == s.height for s in squares)
    assert squares[-1].width == pytest.approx(0.36875)


def test_demonstrator_matches_itself(small_config):
    """Test replaying the demonstrator scores zero distance everywhere."""
    config = _with_eval(small_config, grid="real")

    report = evaluate(None, config, label="demonstrator")

    assert len(report.rows) == 9
    assert all(row.mpd_mm == 0.0 for row in report.rows)
    assert all(row.miou == 1.0 for row in report.rows)
    assert all(row.baseline_mpd_mm > 0.0 for row in report.rows)
    assert all(row.steps == 2 for row in report.rows)
    sizes = sorted({round(row.size, 4) for row in report.rows})
    assert sizes == [0.2, 0.3, 0.35]


def test_untrained_policy_is_scored(small_config):
    """Test an untrained model runs through every configuration."""
    model = FoldPolicyNet(small_config.model, seed=0)

    report = evaluate(model, small_config)

    assert len(report.rows) == 2
    assert report.label == "policy"
    assert all(np.isfinite(row.mpd_mm) for row in report.rows)
    assert all(0.0 <= row.miou <= 1.0 for row in report.rows)
    assert len(report.frames) == 2


def test_rollout_episode_keeps_frames(small_config):
    """Test a single episode report carries one frame per step."""
    report = rollout_episode(
        None, TaskId.DOUBLE_TRIANGLE, small_config, GridPoint(1.0, 30.0)
    )

    assert len(report.rows) == 1
    assert report.rows[0].rotation == 30.0
    assert len(report.frames["DoubleTriangle_00"]) == 2


def test_summaries_recompute_from_rows():
    """Test task summaries are means over the episode rows."""
    report = EvalReport(
        grid="desk",
        rows=[
            EpisodeRow(
                task="DoubleTriangle",
                size=0.3,
                rotation=0.0,
                mpd_mm=mpd,
                miou=0.5,
                steps=2,
                baseline_mpd_mm=100.0,
            )
            for mpd in (10.0, 20.0)
        ],
    )

    (summary,) = report.summaries()

    assert summary.episodes == 2
    assert summary.mpd_mean == 15.0
    assert summary.mpd_std == 5.0
    assert report.mean_mpd("DoubleTriangle") == 15.0
    assert np.isnan(report.mean_mpd("AllCornersInward"))


def test_write_report(tmp_path, small_config):
    """Test CSV, summary and frame files of an evaluation run."""
    report = evaluate(None, small_config, label="demonstrator")

    paths = write_report(report, tmp_path, camera_height=1.0)

    rows = read_episodes(paths["csv"])
    assert list(rows[0].keys()) == EPISODE_COLUMNS
    assert len(rows) == len(report.rows)
    assert float(rows[0]["MPD_mm"]) == report.rows[0].mpd_mm
    summary = json.loads(paths["summary"].read_text())
    assert summary["label"] == "demonstrator"
    assert summary["tasks"][0]["episodes"] == 2
    frames = sorted((tmp_path / "frames").glob("*/step_*.png"))
    assert len(frames) == 4
    episode = tmp_path / "frames" / "DoubleTriangle_01"
    assert (episode / "step_01.png").is_file()


def test_write_report_without_frames(tmp_path, small_config):
    """Test frames can be turned off."""
    report = evaluate(None, small_config)

    write_report(report, tmp_path, write_frames=False)

    assert (tmp_path / "episodes.csv").is_file()
    assert not (tmp_path / "frames").exists()


def test_depth_to_image():
    """Test the table is black and raised cloth is brighter."""
    depth = np.full((4, 4), 1.0)
    depth[1, 1] = 1.0 - 0.015
    depth[2, 2] = 1.0 - 0.5

    image = np.asarray(depth_to_image(depth, camera_height=1.0))

    assert image.dtype == np.uint8
    assert image[0, 0] == 0
    assert 100 < image[1, 1] < 155
    assert image[2, 2] == 255


def _row(task, mpd, baseline=100.0):
    return EpisodeRow(
        task=task,
        size=0.3,
        rotation=0.0,
        mpd_mm=mpd,
        miou=0.5,
        steps=2,
        baseline_mpd_mm=baseline,
    )


def test_demonstrator_beats_untrained_and_doing_nothing(small_config):
    """Test the MPD ordering on a small grid with an exact stand-in."""
    config = _with_eval(
        small_config, tasks=["DoubleTriangle", "AllCornersInward"]
    )
    untrained = evaluate(FoldPolicyNet(config.model, seed=0), config)
    demonstrator = evaluate(None, config, label="demonstrator")

    orderings = compare_to_untrained(demonstrator, untrained)

    assert [o.task for o in orderings] == [
        "DoubleTriangle",
        "AllCornersInward",
    ]
    assert all(o.policy == 0.0 for o in orderings)
    assert all(o.holds for o in orderings)


def test_ordering_fails_when_untrained_is_better():
    """Test a policy no better than the untrained model is flagged."""
    policy = EvalReport(grid="desk", rows=[_row("DoubleTriangle", 30.0)])
    untrained = EvalReport(grid="desk", rows=[_row("DoubleTriangle", 20.0)])

    (ordering,) = compare_to_untrained(policy, untrained)

    assert ordering.untrained == 20.0
    assert ordering.do_nothing == 100.0
    assert not ordering.holds


def test_ordering_needs_the_task_in_both_reports():
    """Test a task the untrained run skipped never holds."""
    policy = EvalReport(grid="desk", rows=[_row("DoubleTriangle", 1.0)])
    untrained = EvalReport(grid="desk", rows=[_row("AllCornersInward", 9.0)])

    (ordering,) = compare_to_untrained(policy, untrained)

    assert np.isnan(ordering.untrained)
    assert not ordering.holds
