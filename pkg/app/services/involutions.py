import logging
import math

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    DegenerateParameters,
    DegenerateTetrahedron,
    GeometryError,
    InvalidAreas,
    NotDegenerate,
)
from app.models.models import (
    AreaValidity,
    FacialAreas,
    InvolutionReport,
    NaturalParams,
    SquaredDistances,
    Tetrahedron,
    as_array,
)
from app.services import areal_identities, linalg, natural_params, tetra_core
from app.services.areal_identities import _half

logger = logging.getLogger(__name__)

OPERATIONS = ("twin", "fiedler", "reciprocal", "orbit")


def twin(n) -> NaturalParams:
    """Swaps every opposite pair: u <-> z, v <-> y, w <-> x."""
    u, v, w, x, y, z = n
    return NaturalParams(z, y, x, w, v, u)


def twin_areas(f) -> FacialAreas:
    """Each twin exterior area is half the other three minus itself; interior areas are unchanged."""
    f = FacialAreas(*f)
    total = f.s
    exterior = tuple(_half(total - 2 * value) for value in f.exterior)
    return FacialAreas(*exterior, *f.interior)


def twin_distances(n) -> SquaredDistances:
    """|A'B'|² = z·ũ/r² and likewise: twin naturals against the unchanged inverse naturals."""
    n = NaturalParams(*(float(value) for value in n))
    r2 = natural_params.r_squared(n)
    if r2 <= 0:
        logging.error(f"twin_distances: in-radius vanishes for {tuple(n)}")
        raise DegenerateParameters("Twin distances need a non-degenerate tetrahedron")
    inverse = natural_params.inverse_from_natural(n)
    return SquaredDistances(*(a * b / r2 for a, b in zip(twin(n), inverse)))


def _interior_vectors(t: Tetrahedron) -> tuple:
    e = tetra_core.edge_vectors(t)
    return (
        linalg.cross(e["AB"], e["CD"]),
        linalg.cross(e["AC"], e["BD"]),
        linalg.cross(e["AD"], e["BC"]),
    )


def _bimedians(t: Tetrahedron) -> tuple:
    """Oriented bimedians ZU, VY, XW."""
    e = tetra_core.edge_vectors(t)
    return (
        linalg.scale(-0.5, linalg.add(e["AC"], e["BD"])),
        linalg.scale(0.5, linalg.add(e["AB"], e["CD"])),
        linalg.scale(0.5, linalg.sub(e["BD"], e["AC"])),
    )


def fiedler_inverse(t: Tetrahedron) -> Tetrahedron:
    """Inverse tetrahedron with A' at the origin; its bimedians are the interior areal vectors over t."""
    if tetra_core.is_degenerate(t):
        logging.error(f"fiedler_inverse: tetrahedron volume below tolerance (t = {float(tetra_core.volume_t(t)):.3e})")
        raise DegenerateTetrahedron("Fiedler's inverse requires a non-degenerate tetrahedron")
    signed = float(tetra_core.triple_product(t))
    p1, p2, p3 = (tuple(float(c) for c in vector) for vector in _interior_vectors(t))
    return Tetrahedron(
        (0.0, 0.0, 0.0),
        linalg.scale(1 / signed, linalg.sub(p2, p3)),
        linalg.scale(-1 / signed, linalg.add(p1, p3)),
        linalg.scale(1 / signed, linalg.sub(p2, p1)),
    )


def _centroid_gram(t: Tetrahedron) -> np.ndarray:
    points = np.array([[float(c) for c in p] for p in t])
    centered = points - points.mean(axis=0)
    return centered @ centered.T


def _relative(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def fiedler_gram_check(t: Tetrahedron) -> dict:
    """Residuals of the Gram-matrix relations between a tetrahedron and its Fiedler inverse."""
    inverse = fiedler_inverse(t)
    volume = float(tetra_core.volume_t(t))
    F = tetra_core.squared_facial_areas(t)
    G_int = as_array(areal_identities.interior_gram(F))
    G_ext = as_array(areal_identities.exterior_gram(F))
    bimedians = np.array(_bimedians(t), dtype=float)

    # the exterior Gram rows are the faces opposite D, C, B, A
    reversal = np.eye(4)[::-1]
    centroid_target = volume ** 2 * reversal @ linalg.pseudo_inverse(G_ext) @ reversal
    inverse_spectrum = np.sort(np.linalg.eigvalsh(_centroid_gram(inverse)))[1:]
    ext_spectrum = np.sort(np.linalg.eigvalsh(G_ext))[1:] / volume ** 2
    return {
        "bimedian": _relative(volume ** 2 * np.linalg.inv(G_int), bimedians @ bimedians.T),
        "centroid": _relative(_centroid_gram(t), centroid_target),
        "inverse_spectrum": _relative(inverse_spectrum, ext_spectrum),
        "interior_det": abs(float(np.linalg.det(G_int)) - 4 * volume ** 4) / (4 * volume ** 4),
        "volume": abs(float(tetra_core.volume_t(inverse)) * volume - 4) / 4,
    }


def reciprocal(f) -> FacialAreas:
    """Areas read off the diagonals of the pseudo-inverses of the exterior and interior areal Grams."""
    f = FacialAreas(*(float(value) for value in f))
    report = areal_identities.euclidean_area_validity(f)
    if report.validity == AreaValidity.non_degenerate_3d:
        logging.error(f"reciprocal: areas {tuple(f)} have full rank")
        raise NotDegenerate("The reciprocal is only defined for degenerate areas")
    if report.validity == AreaValidity.invalid:
        logging.error(f"reciprocal: areas {tuple(f)} are invalid ({report.reason})")
        raise InvalidAreas(f"Areas are not those of a tetrahedron: {report.reason}")
    F = f.squared()
    ext = linalg.pseudo_inverse(as_array(areal_identities.exterior_gram(F)))
    interior = linalg.pseudo_inverse(as_array(areal_identities.interior_gram(F)))
    values = [float(v) for v in np.diag(ext)] + [float(v) for v in np.diag(interior)]
    return FacialAreas(*(math.sqrt(max(value, 0.0)) for value in values))


def reciprocal_check(f) -> dict:
    """Measures reciprocal∘reciprocal against the input and the Gram consistency of one step."""
    f = FacialAreas(*(float(value) for value in f))
    once = reciprocal(f)
    twice = reciprocal(once)
    scale = max(max(f), 1e-300)
    target = linalg.pseudo_inverse(as_array(areal_identities.exterior_gram(f.squared())))
    return {
        "double": max(abs(a - b) for a, b in zip(twice, f)) / scale,
        "scale": twice.s / f.s if f.s else float("nan"),
        "gram": _relative(as_array(areal_identities.exterior_gram(once.squared())), target),
    }


def _orbit(start: FacialAreas, step, max_iter: int) -> dict:
    scale = max(max(start), 1e-300)
    current = start
    closest = math.inf
    for k in range(1, max_iter + 1):
        try:
            current = step(current)
        except GeometryError as exc:
            logger.warning(f"Orbit left the degenerate areas after {k} steps: {exc}")
            return {"status": "diverged", "iterations": k, "reason": exc.code, "closest": closest}
        if not all(math.isfinite(value) for value in current) or not 1e-12 < current.s / start.s < 1e12:
            logger.warning(f"Orbit diverged after {k} steps (s = {current.s:.3e})")
            return {"status": "diverged", "iterations": k, "reason": "scale", "closest": closest}
        gap = max(abs(a - b) for a, b in zip(current, start)) / scale
        closest = min(closest, gap)
        if gap <= settings.ORBIT_RETURN_TOL:
            return {"status": "cycle", "iterations": k, "length": k, "closest": gap}
    return {"status": "open", "iterations": max_iter, "closest": closest}


def involution_orbit(start, max_iter: int = None) -> InvolutionReport:
    """Iterates twin∘reciprocal and reciprocal∘twin from degenerate areas until they return or give up."""
    start = FacialAreas(*(float(value) for value in start))
    max_iter = settings.ORBIT_MAX_ITER if max_iter is None else max_iter
    first = reciprocal(start)
    twin_then_reciprocal = reciprocal(twin_areas(start))
    reciprocal_then_twin = twin_areas(first)
    commute = max(abs(a - b) for a, b in zip(twin_then_reciprocal, reciprocal_then_twin))
    commute /= max(max(reciprocal_then_twin), 1e-300)
    if commute > settings.ORBIT_RETURN_TOL:
        logger.info(f"Twin and reciprocal do not commute here (residual {commute:.3e})")
    orbit = {
        "twin_reciprocal": _orbit(start, lambda f: twin_areas(reciprocal(f)), max_iter),
        "reciprocal_twin": _orbit(start, lambda f: reciprocal(twin_areas(f)), max_iter),
    }
    return InvolutionReport(
        operation="orbit", input=start, output=reciprocal_then_twin, residuals={"commute": commute}, orbit=orbit
    )


def run_involution(operation: str, value) -> InvolutionReport:
    """One involution with the residuals of what it preserves."""
    if operation == "twin":
        n = NaturalParams(*value)
        image = twin(n)
        residuals = {
            "involution": max(abs(a - b) for a, b in zip(twin(image), n)),
            "s": abs(image.s - n.s),
            "omega": abs(natural_params.omega(image) - natural_params.omega(n)),
            "inverse": max(
                abs(a - b)
                for a, b in zip(natural_params.inverse_from_natural(image), natural_params.inverse_from_natural(n))
            ),
        }
        return InvolutionReport(operation=operation, input=n, output=image, residuals=residuals)
    if operation == "fiedler":
        t = Tetrahedron(*value)
        return InvolutionReport(
            operation=operation, input=t, output=fiedler_inverse(t), residuals=fiedler_gram_check(t)
        )
    if operation == "reciprocal":
        f = FacialAreas(*value)
        return InvolutionReport(operation=operation, input=f, output=reciprocal(f), residuals=reciprocal_check(f))
    if operation == "orbit":
        return involution_orbit(value)
    raise ValueError(f"Unknown involution {operation!r}; expected one of {OPERATIONS}")
