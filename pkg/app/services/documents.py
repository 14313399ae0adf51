"""Command bodies shared by the CLI and the HTTP routes: parsed input in, JSON-ready dict out."""
import logging
import math

from app.core.config import settings
from app.core.exceptions import GeometryError, InputParseError, ToleranceFailure
from app.models.models import (
    ABGDParams,
    AreaValidity,
    FacialAreas,
    NaturalParams,
    SquaredDistances,
    Tetrahedron,
    ValidityReport,
)
from app.schemas.schemas import InputDocument
from app.services import (
    areal_identities,
    degeneracy,
    experiments,
    involutions,
    natural_params,
    param_2to2,
    planar,
    reconstruction,
    tetra_core,
)

logger = logging.getLogger(__name__)

CHIROTOPE_KINDS = {0: "triangle", 1: "triangle", 2: "triangle", 3: "triangle", 4: "convex", 5: "convex", 6: "convex"}


def _unavailable(reason: str) -> dict:
    return {"unavailable": reason}


def _areas_of(doc: InputDocument) -> FacialAreas:
    """Areas from whichever input form can supply them."""
    if doc.areas_f is not None:
        return FacialAreas(*doc.areas_f)
    if doc.squared_areas is not None:
        if min(doc.squared_areas) < 0:
            raise InputParseError("squared_areas must be non-negative")
        return FacialAreas(*(math.sqrt(value) for value in doc.squared_areas))
    if doc.vertices is not None:
        return tetra_core.facial_areas(Tetrahedron(*(tuple(p) for p in doc.vertices)))
    if doc.squared_distances is not None:
        return tetra_core.facial_areas(reconstruction.coords_from_distances(doc.squared_distances))
    if doc.naturals is not None:
        return natural_params.areas_from_natural(doc.naturals)
    raise InputParseError(f"Input form {doc.form!r} carries no areas")


def _naturals_of(doc: InputDocument) -> NaturalParams:
    if doc.naturals is not None:
        return NaturalParams(*doc.naturals)
    return natural_params.natural_from_areas(_areas_of(doc))


def _require(doc: InputDocument, *forms: str) -> None:
    if doc.form not in forms:
        raise InputParseError(f"This command accepts {' or '.join(forms)}, got {doc.form}")


def _degenerate_sections(f: FacialAreas, n: NaturalParams, validity: AreaValidity) -> dict:
    sections = {"lattice": _guarded("lattice", lambda: degeneracy.rank_and_lattice(f))}
    try:
        sections["collinear_quadruple"] = degeneracy.collinear_quadruple(n)
    except GeometryError as exc:
        sections["collinear_quadruple"] = _unavailable(exc.code)
    if validity == AreaValidity.rank2_degenerate:
        try:
            p = degeneracy.plucker_from_natural(n)
            sections["plucker"] = {"vector": p, "identity_residual": degeneracy.plucker_identity(p)}
        except GeometryError as exc:
            sections["plucker"] = _unavailable(exc.code)
        sections["planar_class"] = _unavailable("rank2_degenerate")
    else:
        sections["plucker"] = _unavailable("rank1_planar")
        try:
            found = planar.classify_planar(n)
            sections["planar_class"] = _class_body(found)
        except GeometryError as exc:
            sections["planar_class"] = _unavailable(exc.code)
    return sections


def _class_body(found) -> dict:
    return {
        "class_id": found.class_id,
        "candidates": found.candidates,
        "chirotope_case": found.chirotope_case,
        "chirotope": CHIROTOPE_KINDS[found.chirotope_case],
        "signs": found.signs,
        "signed_sums": found.signed_sums,
    }


def _guarded(what: str, compute):
    """Runs one document stage; a stage that fails leaves its reason in place of the value."""
    try:
        return compute()
    except (GeometryError, ToleranceFailure) as exc:
        logger.warning(f"{what} unavailable ({exc.code}): {exc}")
        return _unavailable(exc.code)


_ECHO_TYPES = {
    "areas_f": FacialAreas,
    "squared_areas": FacialAreas,
    "naturals": NaturalParams,
    "squared_distances": SquaredDistances,
}


def _echo(doc: InputDocument) -> dict:
    value = getattr(doc, doc.form)
    if doc.form in _ECHO_TYPES:
        value = _ECHO_TYPES[doc.form](*value)
    elif hasattr(value, "model_dump"):
        value = value.model_dump()
    return {"form": doc.form, doc.form: value}


def analyze(doc: InputDocument) -> dict:
    """Everything derivable from one input; sections that cannot be derived carry a reason code."""
    body = {"input": _echo(doc)}
    vertices = None
    if doc.form == "vertices":
        vertices = Tetrahedron(*(tuple(p) for p in doc.vertices))
    elif doc.form == "squared_distances":
        vertices = reconstruction.coords_from_distances(doc.squared_distances)
    elif doc.form not in ("areas_f", "naturals", "squared_areas"):
        raise InputParseError(f"analyze does not accept {doc.form}")

    if doc.form == "naturals":
        n = NaturalParams(*doc.naturals)
        f = _guarded("areas", lambda: natural_params.areas_from_natural(n))
    else:
        f = _areas_of(doc)
        n = natural_params.natural_from_areas(f)
    has_areas = isinstance(f, FacialAreas)
    report = _guarded("validity", lambda: areal_identities.euclidean_area_validity(f)) if has_areas else f
    validity = report.validity if isinstance(report, ValidityReport) else None
    missing = validity.value if validity is not None else report["unavailable"]

    if vertices is None and validity == AreaValidity.non_degenerate_3d:
        rebuilt = _guarded("vertices", lambda: reconstruction.reconstruct_from_areas(f).vertices)
        if isinstance(rebuilt, Tetrahedron):
            vertices = rebuilt
        else:
            body["vertices"] = rebuilt
    if vertices is not None:
        body["vertices"] = vertices
    if doc.form == "naturals":
        body["squared_distances"] = _guarded("distances", lambda: natural_params.distances_from_natural(n))
    elif vertices is not None:
        body["squared_distances"] = tetra_core.squared_distances(vertices)
    body.setdefault("vertices", _unavailable(missing))
    body.setdefault("squared_distances", _unavailable(missing))

    if has_areas:
        gram = _guarded("gramian", lambda: areal_identities.areal_gram(f))
        body.update(
            {
                "areas_f": f,
                "squared_areas": f.squared(),
                "tau": areal_identities.tau_table(f),
                "xi": areal_identities.yetter_xi(f),
                "gramian": gram if isinstance(gram, dict) else gram.gramian,
                "vertex_gramians": gram if isinstance(gram, dict) else gram.vertex_gramians,
                "s": f.s,
            }
        )
    else:
        for key in ("areas_f", "squared_areas", "tau", "xi", "gramian", "vertex_gramians", "s"):
            body[key] = f

    omega = float(natural_params.omega(n))
    t4 = float(natural_params.t4(n))
    t = t4 ** 0.25 if t4 >= 0 else None
    body.update(
        {
            "validity": report,
            "naturals": n,
            "inverse_naturals": _guarded("inverse naturals", lambda: natural_params.inverse_from_natural(n)),
            "omega": omega,
            "t": t if t is not None else _unavailable("negative_omega"),
            "r": t / f.s if t is not None and has_areas and f.s > 0 else _unavailable("negative_omega"),
        }
    )
    if validity in (AreaValidity.rank2_degenerate, AreaValidity.rank1_planar):
        body["degenerate"] = _degenerate_sections(f, n, validity)
    if validity == AreaValidity.invalid:
        body["error"] = "invalid_areas"
        body["detail"] = report.reason
    logger.info(f"analyze: {doc.form} input classified as {missing}")
    return body


def reconstruct(doc: InputDocument) -> dict:
    _require(doc, "areas_f", "squared_areas")
    result = reconstruction.reconstruct_from_areas(_areas_of(doc))
    d = tetra_core.squared_distances(result.vertices)
    logger.info(f"reconstruct: residual {result.residual:.3e}, chirality {result.chirality}")
    return {
        "vertices": result.vertices,
        "achieved_f": result.achieved_f,
        "residual": result.residual,
        "chirality": result.chirality,
        "squared_distances": d,
        "distance_multiset": sorted(d),
    }


def classify(doc: InputDocument) -> dict:
    _require(doc, "naturals", "areas_f", "squared_areas", "vertices")
    f = _areas_of(doc)
    n = _naturals_of(doc)
    report = areal_identities.euclidean_area_validity(f)
    body = {"validity": report.validity, "rank": report.rank, "naturals": n}
    if report.validity in (AreaValidity.rank2_degenerate, AreaValidity.rank1_planar):
        body.update(_degenerate_sections(f, n, report.validity))
    else:
        body["lattice"] = degeneracy.rank_and_lattice(n)
    logger.info(f"classify: {report.validity.value} (rank {report.rank})")
    return body


def canonical_planar(doc: InputDocument) -> dict:
    _require(doc, "squared_areas", "areas_f")
    F = doc.squared_areas if doc.squared_areas is not None else FacialAreas(*doc.areas_f).squared()
    config = planar.canonical_planar(F)
    found = planar.classify_planar(natural_params.natural_from_areas(_areas_of(doc)))
    logger.info(f"canonical-planar: class {found.class_id}, gyration {config.gyration:.6g}")
    return {
        "planar_class": _class_body(found),
        "squared_distances": config.d_star,
        "coordinates": config.coordinates,
        "gyration": config.gyration,
        "rho": config.rho,
        "residual": config.residual,
        "gradient_residual": planar.gradient_residual(config),
    }


def invert_areas(doc: InputDocument) -> dict:
    _require(doc, "squared_areas", "areas_f")
    F = doc.squared_areas if doc.squared_areas is not None else FacialAreas(*doc.areas_f).squared()
    witness = reconstruction.invert_area_map(F)
    logger.info(f"invert-areas: {witness.branch} branch, residual {witness.residual:.3e}")
    return {
        "squared_distances": witness.d_star,
        "branch": witness.branch,
        "delta_star": witness.delta_star,
        "residual": witness.residual,
    }


def involution(operation: str, doc: InputDocument) -> dict:
    if operation == "twin":
        value = _naturals_of(doc)
    elif operation == "fiedler":
        _require(doc, "vertices")
        value = Tetrahedron(*(tuple(p) for p in doc.vertices))
    elif operation in ("reciprocal", "orbit"):
        value = _areas_of(doc)
    else:
        raise InputParseError(f"Unknown involution {operation!r}; expected one of {involutions.OPERATIONS}")
    report = involutions.run_involution(operation, value)
    logger.info(f"involution {operation}: residuals {report.residuals}")
    body = {"operation": operation, "input": report.input, "output": report.output, "residuals": report.residuals}
    if report.orbit:
        body["orbit"] = report.orbit
    return body


def _solution_areas(n: NaturalParams):
    try:
        return natural_params.areas_from_natural(n)
    except GeometryError as exc:
        return _unavailable(exc.code)


def solve_2to2(doc: InputDocument) -> dict:
    _require(doc, "abgd", "naturals", "areas_f")
    if doc.abgd is not None:
        abgd = ABGDParams(
            doc.abgd.alpha, doc.abgd.beta, doc.abgd.gamma, doc.abgd.delta, varsigma=doc.abgd.varsigma
        )
        if abgd.varsigma is None:
            raise InputParseError("abgd needs varsigma")
    else:
        abgd = param_2to2.abgd_from_natural(_naturals_of(doc))
    bound = param_2to2.sigma_bound(abgd)
    result = param_2to2.solve_2to2(abgd)
    logger.info(f"solve-2to2: {len(result.solutions)} solutions above bound {bound:.6g}")
    return {
        "abgd": abgd,
        "bound": bound,
        "cubic": param_2to2.cubic_psi(abgd),
        "solutions": [
            {"naturals": solution, "areas_f": _solution_areas(solution), "residual": residual}
            for solution, residual in zip(result.solutions, result.residuals)
        ],
        "pairing_residual": result.pairing_residual,
    }


def conjectures(name: str, trials: int = None, seed: int = None, dim: int = 3) -> dict:
    seed = settings.DEFAULT_SEED if seed is None else seed
    if name not in experiments.HARNESSES:
        raise InputParseError(f"Unknown conjecture {name!r}; expected one of {sorted(experiments.HARNESSES)}")
    kwargs = {"trials": trials, "seed": seed}
    if name == "nsimplex":
        kwargs["dim"] = dim
    report = experiments.HARNESSES[name](**kwargs)
    return {"report": report, "seed": seed, "trials": report.trials}
