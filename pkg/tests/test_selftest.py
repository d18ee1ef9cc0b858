"""Tests for the built-in verification suite."""

from unittest.mock import patch

import pytest

from seqfold import selftest
from seqfold.selftest import CheckResult, all_passed, run_selftest


@pytest.mark.parametrize(
    "check",
    [
        selftest._softmax_rows,
        selftest._layer_norm_moments,
        selftest._upsample_values,
        selftest._adam_determinism,
        selftest._feature_filter,
        selftest._sample_count,
    ],
)
def test_numeric_checks_pass(check):
    """Test each fast numeric check passes on the shipped code."""
    result = check()

    assert result.passed, result.detail


def test_numeric_checks_are_registered():
    """Test the numeric checks run as part of the suite."""
    names = {check.__name__ for check in selftest.CHECKS}

    assert {
        "_softmax_rows",
        "_layer_norm_moments",
        "_upsample_values",
        "_adam_determinism",
    } <= names


def test_adam_runs_differ_across_seeds():
    """Test the determinism check compares real updates."""
    first = selftest._adam_run(5)

    assert not (first == selftest._adam_run(6)).all()


def test_failed_check_is_reported_not_raised():
    """Test a failing check shows up in the results."""
    checks = [
        lambda: CheckResult("ok", True, ""),
        lambda: CheckResult("broken", False, "bad"),
    ]

    with patch.object(selftest, "CHECKS", checks):
        results = run_selftest()

    assert [r.name for r in results] == ["ok", "broken"]
    assert not all_passed(results)
    assert not all_passed([])
