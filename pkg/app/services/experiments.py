"""Seeded harnesses that test the conjectures over random trials and report pass/fail counts."""
import logging
import math

import numpy as np

from app.core.config import settings
from app.core.exceptions import HedronometryError
from app.models.models import ExperimentReport, Tetrahedron
from app.services import degeneracy, involutions, natural_params, param_2to2, tetra_core

logger = logging.getLogger(__name__)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent counter-based stream for one trial."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def random_simplex(rng: np.random.Generator, dim: int, min_content: float = 1e-3) -> np.ndarray:
    while True:
        points = rng.uniform(-1.0, 1.0, size=(dim + 1, dim))
        if abs(np.linalg.det(points[1:] - points[0])) > min_content:
            return points


def random_tetrahedron(rng: np.random.Generator, min_t: float = 0.05) -> Tetrahedron:
    points = random_simplex(rng, 3, min_t)
    return Tetrahedron(*(tuple(float(c) for c in p) for p in points))


def _squeezed(rng: np.random.Generator):
    t = random_tetrahedron(rng, min_t=0.2)
    axis = tuple(float(c) for c in rng.normal(size=3))
    return t, axis, degeneracy.squeeze_limit(t, axis)


def _record(report: ExperimentReport, trial: int, residual: float, ok: bool, reason: str = "") -> None:
    if math.isfinite(residual):
        report.worst_residual = max(report.worst_residual, residual)
    if ok:
        report.passed += 1
        return
    report.failed += 1
    report.failures.append({"trial": trial, "reason": reason, "residual": residual})


def _finish(report: ExperimentReport) -> ExperimentReport:
    logger.info(
        f"{report.name}: {report.passed}/{report.trials} passed, worst residual {report.worst_residual:.3e}"
    )
    return report


def nsimplex(trials: int = None, seed: int = None, dim: int = 3, tol: float = 1e-7) -> ExperimentReport:
    trials = settings.DEFAULT_TRIALS if trials is None else trials
    seed = settings.DEFAULT_SEED if seed is None else seed
    report = ExperimentReport(name="nsimplex", trials=trials, details={"dim": dim})
    for trial in range(trials):
        points = random_simplex(trial_rng(seed, trial), dim)
        try:
            result = natural_params.nsimplex_conjecture_check(dim, points)
        except HedronometryError as exc:
            _record(report, trial, math.inf, False, exc.code)
            continue
        residual = max(result.residual, result.pair_residual)
        _record(report, trial, residual, residual <= tol, "residual above tolerance")
    return _finish(report)


def two_to_two(trials: int = None, seed: int = None, tol: float = 1e-6) -> ExperimentReport:
    trials = settings.DEFAULT_TRIALS if trials is None else trials
    seed = settings.DEFAULT_SEED if seed is None else seed
    report = ExperimentReport(name="two-to-two", trials=trials)
    paired = 0
    for trial in range(trials):
        _, _, f = _squeezed(trial_rng(seed, trial))
        n = natural_params.natural_from_areas(f)
        try:
            result = param_2to2.solve_2to2(param_2to2.abgd_from_natural(n))
        except HedronometryError as exc:
            _record(report, trial, math.inf, False, exc.code)
            continue
        gaps = [max(abs(a - b) for a, b in zip(solution, n)) / n.s for solution in result.solutions]
        residual = min(gaps) if gaps else math.inf
        if result.pairing_residual is not None:
            paired += 1
            residual = max(residual, result.pairing_residual)
        _record(report, trial, residual, residual <= tol, "fixture not recovered" if gaps else "no positive solution")
    report.details["paired"] = paired
    return _finish(report)


def involution_order(trials: int = None, seed: int = None, max_iter: int = None) -> ExperimentReport:
    trials = settings.DEFAULT_TRIALS if trials is None else trials
    seed = settings.DEFAULT_SEED if seed is None else seed
    report = ExperimentReport(name="involution-order", trials=trials)
    outcomes = {"twin_reciprocal": {}, "reciprocal_twin": {}}
    lengths = {"twin_reciprocal": [], "reciprocal_twin": []}
    for trial in range(trials):
        _, _, f = _squeezed(trial_rng(seed, trial))
        try:
            orbit = involutions.involution_orbit(f, max_iter).orbit
        except HedronometryError as exc:
            _record(report, trial, math.inf, False, exc.code)
            continue
        for name, result in orbit.items():
            outcomes[name][result["status"]] = outcomes[name].get(result["status"], 0) + 1
            if result["status"] == "cycle":
                lengths[name].append(result["length"])
        closed = all(result["status"] == "cycle" for result in orbit.values())
        closest = max(result["closest"] for result in orbit.values())
        _record(report, trial, closest, closed, "orbit did not close")
    report.details = {"outcomes": outcomes, "cycle_lengths": lengths}
    return _finish(report)


def _planar_projection(t: Tetrahedron, frame: np.ndarray, theta: float) -> np.ndarray:
    across = -math.sin(theta) * frame[0] + math.cos(theta) * frame[1]
    points = np.array([[float(c) for c in p] for p in t])
    return np.column_stack([points @ across, points @ frame[2]])


def gyration_profile(t: Tetrahedron, frame: np.ndarray) -> tuple:
    """
    Projected gyration over θ is (mean + a·cos 2θ + b·sin 2θ)/16; returns (mean, hypot(a, b)).
    The minimizing angle is unique exactly when the spread is positive.
    """
    points = np.array([[float(c) for c in p] for p in t])
    diffs = np.array([points[j] - points[i] for i in range(4) for j in range(i + 1, 4)])
    a, b, c = (diffs @ frame[k] for k in range(3))
    saa, sbb, sab, scc = float(a @ a), float(b @ b), float(a @ b), float(c @ c)
    return 0.5 * (saa + sbb) + scc, math.hypot(0.5 * (sbb - saa), sab)


def canmap(trials: int = None, seed: int = None, angles: int = 36, tol: float = 1e-9) -> ExperimentReport:
    """
    Rotates squeeze-limit pre-images about the squeeze axis, projects them onto a plane through
    the axis and keeps the least gyration found, with how far its areas are from the target.
    A trial fails when the minimizing projection is not unique or the angle grid misses the
    closed-form minimum by more than its resolution allows.
    """
    trials = settings.DEFAULT_TRIALS if trials is None else trials
    seed = settings.DEFAULT_SEED if seed is None else seed
    report = ExperimentReport(name="canmap", trials=trials)
    samples = []
    for trial in range(trials):
        t, axis, target = _squeezed(trial_rng(seed, trial))
        frame = degeneracy.axis_frame(axis)
        best = None
        for k in range(angles):
            theta = math.pi * k / angles
            planar = _planar_projection(t, frame, theta)
            embedded = Tetrahedron(*((float(x), float(y), 0.0) for x, y in planar))
            gyration = sum(tetra_core.squared_distances(embedded)) / 16
            areas = tetra_core.facial_areas(embedded)
            mismatch = max(abs(a - b) for a, b in zip(areas, target)) / max(target)
            if best is None or gyration < best[1]:
                best = (theta, gyration, mismatch)
        mean, spread = gyration_profile(t, frame)
        exact = (mean - spread) / 16
        gap = (best[1] - exact) / max(mean / 16, 1e-300)
        allowed = spread * (1.0 - math.cos(math.pi / angles)) / max(mean, 1e-300) + tol
        samples.append(
            {
                "trial": trial,
                "theta": best[0],
                "gyration": best[1],
                "exact_gyration": exact,
                "area_mismatch": best[2],
            }
        )
        if spread <= tol * mean:
            _record(report, trial, spread / max(mean, 1e-300), False, "minimizing projection is not unique")
        else:
            _record(report, trial, gap, -tol <= gap <= allowed, "angle grid missed the minimum")
    report.details["samples"] = samples
    return _finish(report)


HARNESSES = {
    "nsimplex": nsimplex,
    "two-to-two": two_to_two,
    "involution-order": involution_order,
    "canmap": canmap,
}
