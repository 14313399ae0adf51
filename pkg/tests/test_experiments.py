import math

import numpy as np
import pytest

from app.services import degeneracy, experiments
from tests.strategies import REGULAR, RIGHT_CORNER


def test_trial_streams_are_reproducible_and_independent():
    first = experiments.trial_rng(7, 0).uniform(size=4)
    assert np.array_equal(first, experiments.trial_rng(7, 0).uniform(size=4))
    assert not np.array_equal(first, experiments.trial_rng(7, 1).uniform(size=4))
    assert not np.array_equal(first, experiments.trial_rng(8, 0).uniform(size=4))


def test_random_simplex_has_volume():
    rng = experiments.trial_rng(0, 0)
    for dim in (2, 3, 4):
        points = experiments.random_simplex(rng, dim)
        assert points.shape == (dim + 1, dim)
        assert abs(np.linalg.det(points[1:] - points[0])) > 1e-3


def test_nsimplex_harness():
    report = experiments.nsimplex(trials=20, seed=1, dim=3)
    assert report.name == "nsimplex"
    assert report.passed + report.failed == 20
    assert report.passed >= 18
    assert len(report.failures) == report.failed


def test_harness_is_deterministic():
    first = experiments.nsimplex(trials=5, seed=3, dim=2)
    second = experiments.nsimplex(trials=5, seed=3, dim=2)
    assert first.worst_residual == second.worst_residual
    assert first.passed == second.passed


def test_two_to_two_harness():
    report = experiments.two_to_two(trials=20, seed=0)
    assert report.passed + report.failed == 20
    assert report.passed >= 15
    assert 0 <= report.details["paired"] <= 20


def test_involution_order_harness():
    report = experiments.involution_order(trials=5, seed=0, max_iter=20)
    assert report.passed + report.failed == 5
    for name in ("twin_reciprocal", "reciprocal_twin"):
        counts = report.details["outcomes"][name]
        assert set(counts) <= {"cycle", "open", "diverged"}
        assert sum(counts.values()) <= 5
        assert all(length >= 1 for length in report.details["cycle_lengths"][name])


def test_canmap_harness():
    report = experiments.canmap(trials=4, seed=2, angles=12)
    assert report.passed == 4
    samples = report.details["samples"]
    assert [sample["trial"] for sample in samples] == [0, 1, 2, 3]
    for sample in samples:
        assert 0 <= sample["theta"] < math.pi
        assert sample["gyration"] > 0
        assert sample["area_mismatch"] >= 0
        assert sample["exact_gyration"] <= sample["gyration"] * (1 + 1e-12)
    assert report.failed == len(report.failures) == 0


def test_gyration_profile_of_right_corner():
    frame = degeneracy.axis_frame((0.0, 0.0, 1.0))
    assert experiments.gyration_profile(RIGHT_CORNER, frame) == pytest.approx((6.0, 1.0))


def test_symmetric_pre_image_has_no_unique_projection():
    frame = degeneracy.axis_frame((0.0, 0.0, 1.0))
    mean, spread = experiments.gyration_profile(REGULAR, frame)
    assert mean > 0
    assert spread <= 1e-12 * mean


def test_harness_registry():
    assert set(experiments.HARNESSES) == {"nsimplex", "two-to-two", "involution-order", "canmap"}
