import logging
import math
from fractions import Fraction

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    DegenerateGramian,
    InvalidAreas,
    NotRealizable,
    ToleranceFailure,
    YetterViolated,
)
from app.models.models import (
    EDGE_FACES,
    EDGES,
    AreaMapWitness,
    AreaValidity,
    FacialAreas,
    ReconstructionResult,
    SquaredDistances,
    Tetrahedron,
    as_array,
)
from app.services import areal_identities, linalg, tetra_core

logger = logging.getLogger(__name__)

QUARTER = Fraction(1, 4)
LEFT_NULL = (1, 1, 1, 1, -1, -1, -1)

_FACE_LABELS = ("ABC", "ABD", "ACD", "BCD")
_SPLITS = (("AB", "CD"), ("AC", "BD"), ("AD", "BC"))


def _edge_index(a: str, b: str) -> int:
    return EDGES.index("".join(sorted(a + b)))


def _face_form(face: str) -> list:
    Q = [[0] * 6 for _ in range(6)]
    edges = [_edge_index(face[i], face[j]) for i, j in ((0, 1), (0, 2), (1, 2))]
    for i in edges:
        for j in edges:
            Q[i][j] = -QUARTER if i == j else QUARTER
    return Q


def _split_form(first: str, second: str) -> list:
    """D_ab·D_cd − ((b − a)·(d − c))², written as a symmetric form on d."""
    a, b = first
    c, d = second
    Q = [[0] * 6 for _ in range(6)]
    i, j = _edge_index(a, b), _edge_index(c, d)
    Q[i][j] = Q[j][i] = 2 * QUARTER
    # (b − a)·(d − c) = ½(D_ad + D_bc − D_ac − D_bd)
    coefficients = [0] * 6
    coefficients[_edge_index(a, d)] += 1
    coefficients[_edge_index(b, c)] += 1
    coefficients[_edge_index(a, c)] -= 1
    coefficients[_edge_index(b, d)] -= 1
    for p in range(6):
        for q in range(6):
            Q[p][q] -= QUARTER * coefficients[p] * coefficients[q]
    return Q


# quadratic forms of the seven squared areas in the squared distances
AREA_FORMS = tuple(_face_form(face) for face in _FACE_LABELS) + tuple(
    _split_form(first, second) for first, second in _SPLITS
)


def area_polynomial_map(d, branch: str = "plus") -> FacialAreas:
    """±(three-point and Talata determinants); Yetter's identity holds for either sign."""
    if branch not in ("plus", "minus"):
        raise ValueError(f"Unknown branch {branch!r}")
    dets = areal_identities.cm_determinants(d)
    values = dets.three_point + dets.talata
    if branch == "minus":
        values = tuple(-value for value in values)
    return FacialAreas(*values)


def area_map_jacobian(d) -> tuple:
    """Rows are the gradients 2Q·d of the seven area forms; also returns det(JᵀJ)."""
    d = tuple(d)
    J = [[2 * sum(Q[i][j] * d[j] for j in range(6)) for i in range(6)] for Q in AREA_FORMS]
    JT = [list(column) for column in zip(*J)]
    normal = linalg.matmul(JT, J)
    if any(isinstance(value, float) for value in d):
        determinant = float(np.linalg.det(as_array(normal)))
    else:
        determinant = linalg.det(normal)
    return J, determinant


def left_null_residual(J) -> tuple:
    """Jᵀn for n = (1, 1, 1, 1, −1, −1, −1)."""
    return tuple(sum(LEFT_NULL[k] * J[k][i] for k in range(7)) for i in range(6))


def reconstruct_from_areas(f) -> ReconstructionResult:
    f = FacialAreas(*(float(value) for value in f))
    report = areal_identities.euclidean_area_validity(f)
    if report.validity != AreaValidity.non_degenerate_3d:
        logging.error(f"reconstruct_from_areas: areas are {report.validity.value} ({report.reason})")
        raise InvalidAreas(f"Areas do not belong to a non-degenerate tetrahedron: {report.reason or report.validity.value}")

    G_A = areal_identities.vertex_gram(f.squared(), "A")
    gramian = linalg.det3(G_A)
    if gramian <= 0:
        logging.error(f"reconstruct_from_areas: Gramian {gramian:.6g} is not positive")
        raise InvalidAreas("Gramian at A must be positive")
    values, vectors = linalg.sym_eigen(as_array(G_A))
    # V = Λ^½ Uᵀ has VᵀV = G_A, so its columns carry the dot products of AB×AC, AD×AB, AC×AD
    V = np.diag(np.sqrt(np.clip(values, 0.0, None))) @ vectors.T
    p, q, r = (tuple(float(c) for c in V[:, k]) for k in range(3))
    t = gramian ** 0.25

    origin = (0.0, 0.0, 0.0)
    vertices = Tetrahedron(
        origin,
        linalg.scale(1.0 / t, linalg.cross(p, q)),
        linalg.scale(1.0 / t, linalg.cross(r, p)),
        linalg.scale(1.0 / t, linalg.cross(q, r)),
    )
    achieved = tetra_core.facial_areas(vertices)
    residual = max(abs(a - b) for a, b in zip(achieved, f)) / max(max(f), 1e-300)
    if residual > 1e-7:
        logging.error(f"reconstruct_from_areas: residual {residual:.3e} after reconstruction")
        raise ToleranceFailure("Reconstructed tetrahedron does not reproduce the areas")
    logger.debug(f"Reconstructed tetrahedron with t = {t:.6g}, residual {residual:.3e}")
    return ReconstructionResult(
        vertices=vertices,
        achieved_f=achieved,
        residual=residual,
        chirality=tetra_core.orientation(vertices),
    )


def coords_from_distances(d, dim: int = 3) -> Tetrahedron:
    """Embeds squared distances with A at the origin through the Gram matrix of AB, AC, AD."""
    if dim not in (1, 2, 3):
        raise ValueError(f"Embedding dimension must be 1, 2 or 3, got {dim}")
    d = SquaredDistances(*(float(value) for value in d))
    D = {}
    for edge in EDGES:
        D[edge] = D[edge[::-1]] = d.edge(edge)
    labels = ("B", "C", "D")
    G = [[0.5 * (D["A" + a] + D["A" + b] - (D[a + b] if a != b else 0.0)) for b in labels] for a in labels]
    values, vectors = linalg.sym_eigen(as_array(G))
    top = max(float(np.max(np.abs(values))), 1e-300)
    tol = settings.GRAM_RANK_TOL
    if float(values.min()) < -tol * top:
        logging.error(f"coords_from_distances: lineal Gram eigenvalues {values}")
        raise NotRealizable("Squared distances are not realizable in Euclidean space")
    if dim < 3 and float(np.max(np.abs(values[dim:]))) > tol * top:
        logging.error(f"coords_from_distances: discarded eigenvalues {values[dim:]} in dimension {dim}")
        raise NotRealizable(f"Squared distances need more than {dim} dimensions")

    embedded = vectors[:, :dim] * np.sqrt(np.clip(values[:dim], 0.0, None))
    points = Tetrahedron((0.0,) * dim, *(tuple(float(c) for c in row) for row in embedded))
    for edge in EDGES:
        a, b = (getattr(points, label) for label in edge)
        achieved = sum((x - y) ** 2 for x, y in zip(a, b))
        if abs(achieved - d.edge(edge)) > 1e-8 * max(max(d), 1e-300):
            logging.error(f"coords_from_distances: {edge} reproduced as {achieved}, wanted {d.edge(edge)}")
            raise ToleranceFailure("Embedding does not reproduce the squared distances")
    return points


def area_cm_forms(F) -> SquaredDistances:
    """fᵀQ_ab f = ½(F_abc F_abd + F_abc F_ab|cd + F_abd F_ab|cd) − ¼(F_abc² + F_abd² + F_ab|cd²)."""
    values = []
    for edge in EDGES:
        i, j, k = EDGE_FACES[edge]
        a, b, c = F[i], F[j], F[k]
        values.append(2 * QUARTER * (a * b + a * c + b * c) - QUARTER * (a * a + b * b + c * c))
    return SquaredDistances(*values)


def invert_area_map(F, tol: float = None) -> AreaMapWitness:
    """
    Squared distances d* whose signed determinants reproduce the squared areas F:
    d* = δ*·(fᵀQ_ab f) with δ* = |Γ|^(−½), on the plus branch when Γ > 0.
    """
    F = tuple(float(value) for value in F)
    tol = settings.AREA_XI_TOL if tol is None else tol
    scale = max(sum(abs(value) for value in F), 1e-300)
    xi = areal_identities.yetter_xi_squared(F)
    if abs(xi) > tol * scale:
        logging.error(f"invert_area_map: Yetter residual {xi:.6g} on scale {scale:.6g}")
        raise YetterViolated("Squared areas violate Yetter's identity")
    gramian = linalg.det3(areal_identities.vertex_gram(F, "A"))
    largest = max(abs(value) for value in F)
    if abs(gramian) <= settings.GRAM_RANK_TOL * largest ** 3:
        logging.error(f"invert_area_map: Gramian {gramian:.6g} vanishes")
        raise DegenerateGramian("Squared areas with vanishing Gramian have no witness")

    delta_star = 1.0 / math.sqrt(abs(gramian))
    d_star = SquaredDistances(*(delta_star * value for value in area_cm_forms(F)))
    branch = "plus" if gramian > 0 else "minus"
    achieved = area_polynomial_map(d_star, branch)
    residual = max(abs(a - b) for a, b in zip(achieved, F)) / max(max(abs(value) for value in F), 1e-300)
    if residual > 1e-8:
        logging.error(f"invert_area_map: witness residual {residual:.3e}")
        raise ToleranceFailure("Area-map witness does not reproduce the squared areas")
    logger.debug(f"Area-map witness on the {branch} branch, delta* = {delta_star:.6g}")
    return AreaMapWitness(d_star=d_star, branch=branch, delta_star=delta_star, residual=residual)
