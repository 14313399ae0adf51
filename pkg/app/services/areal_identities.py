import logging
from fractions import Fraction

import numpy as np

from app.core.config import settings
from app.models.models import (
    EDGE_FACES,
    EDGES,
    AreaValidity,
    ArealGram,
    CMDeterminants,
    FacialAreas,
    SquaredDistances,
    Tau,
    TauTable,
    Tetrahedron,
    ValidityReport,
    as_array,
)
from app.services import linalg, tetra_core

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

# vertex -> rows of G_ext (faces ABC, ABD, ACD, BCD) meeting there
VERTEX_ROWS = {"A": (0, 1, 2), "B": (0, 1, 3), "C": (0, 2, 3), "D": (1, 2, 3)}


def _half(value):
    # keeps integers and Fractions exact, floats stay floats
    return value / 2 if isinstance(value, float) else value * HALF


def tau_table(f) -> TauTable:
    f = FacialAreas(*f)
    rows = []
    for edge in EDGES:
        i, j, k = EDGE_FACES[edge]
        a, b, c = f[i], f[j], f[k]
        rows.append(Tau(a + b + c, a + b - c, c + b - a, c + a - b))
    return TauTable(*rows)


def yetter_xi(f):
    f = FacialAreas(*f)
    return sum(value * value for value in f.exterior) - sum(value * value for value in f.interior)


def yetter_xi_squared(F):
    """The linear form of Yetter's identity on squared areas."""
    return F[0] + F[1] + F[2] + F[3] - F[4] - F[5] - F[6]


def exterior_gram(F) -> list:
    """4×4 Gram matrix of the signed exterior vectors AB×AC, AD×AB, AC×AD, BD×BC."""
    G = [[0] * 4 for _ in range(4)]
    for i in range(4):
        G[i][i] = F[i]
    for edge in EDGES:
        i, j, k = EDGE_FACES[edge]
        G[i][j] = G[j][i] = _half(F[k] - F[i] - F[j])
    return G


def interior_gram(F) -> list:
    """3×3 Gram matrix of the interior vectors AB×CD, AC×BD, AD×BC."""
    F1, F2, F3, F4, I1, I2, I3 = F
    w12 = _half(F2 + F3 - F1 - F4)
    w13 = _half(F2 + F4 - F1 - F3)
    w23 = _half(F1 + F2 - F3 - F4)
    return [[I1, w12, w13], [w12, I2, w23], [w13, w23, I3]]


def vertex_gram(F, vertex: str) -> list:
    G = exterior_gram(F)
    rows = VERTEX_ROWS[vertex]
    return [[G[i][j] for j in rows] for i in rows]


def areal_gram_from_squared(F) -> ArealGram:
    grams = {vertex: vertex_gram(F, vertex) for vertex in "ABCD"}
    gramians = tuple(linalg.det3(grams[vertex]) for vertex in "ABCD")
    return ArealGram(
        G_A=grams["A"],
        G_B=grams["B"],
        G_C=grams["C"],
        G_D=grams["D"],
        G_ext=exterior_gram(F),
        G_int=interior_gram(F),
        gramian=gramians[0],
        vertex_gramians=gramians,
        xi=yetter_xi_squared(F),
    )


def areal_gram(f) -> ArealGram:
    return areal_gram_from_squared(FacialAreas(*f).squared())


def gramian_difference(F) -> tuple:
    """Γ_B − Γ_A together with the closed-form multiple of Ξ it must equal."""
    F1, F2, F3, F4, I1, I2, I3 = F
    difference = linalg.det3(vertex_gram(F, "B")) - linalg.det3(vertex_gram(F, "A"))
    factor = ((F3 - F4) * (2 * F1 + 2 * F2 - I1) + (F1 - F2) * (I2 - I3))
    closed_form = factor * yetter_xi_squared(F)
    closed_form = closed_form / 4 if isinstance(closed_form, float) else closed_form * Fraction(1, 4)
    return difference, closed_form


def interior_gram_check(f) -> float:
    """Relative residual of det(G_int) = 4Γ (valid when Yetter's identity holds)."""
    F = FacialAreas(*f).squared()
    gram_int = float(linalg.det3(interior_gram(F)))
    gramian = float(linalg.det3(vertex_gram(F, "A")))
    scale = max(sum(float(value) for value in F), 1e-300) ** 3
    return abs(gram_int - 4 * gramian) / scale


def areal_cosine_squared(F, edge: str):
    i, j, k = EDGE_FACES[edge]
    return _half(F[i] + F[j] - F[k])


def areal_cosine(f, edge: str):
    """½(F_abc + F_abd − F_ab|cd), the dot product of the two face vectors sharing the edge."""
    return areal_cosine_squared(FacialAreas(*f).squared(), edge)


def areal_sine_squared(f, edge: str):
    tau = getattr(tau_table(f), edge)
    product = tau.t0 * tau.t1 * tau.t2 * tau.t3
    return product / 4 if isinstance(product, float) else product * Fraction(1, 4)


def gram_minor(f, edge: str):
    """2×2 principal minor of the exterior Gram matrix for the two faces sharing an edge."""
    F = FacialAreas(*f).squared()
    i, j, _ = EDGE_FACES[edge]
    G = exterior_gram(F)
    return G[i][i] * G[j][j] - G[i][j] * G[j][i]


def minor_factorization_check(f) -> dict:
    """Per-edge residual of minor = ¼·Τ₀Τ₁Τ₂Τ₃."""
    report = {}
    for edge in EDGES:
        report[edge] = gram_minor(f, edge) - areal_sine_squared(f, edge)
    return report


def cm_determinants(d) -> CMDeterminants:
    d = SquaredDistances(*d)
    D = {}
    for edge in EDGES:
        D[edge] = D[edge[::-1]] = d.edge(edge)
    for label in "ABCD":
        D[label + label] = 0

    def matrix(labels):
        return [[D[a + b] for b in labels] for a in labels]

    def dot2(a, b, c, e):
        # (b − a)·(e − c)
        return _half(D[a + e] + D[b + c] - D[a + c] - D[b + e])

    three = tuple(-_quarter(linalg.bordered_det(matrix(face))) for face in ("ABC", "ABD", "ACD", "BCD"))
    talata = []
    for first, second in (("AB", "CD"), ("AC", "BD"), ("AD", "BC")):
        cross_dot = dot2(first[0], first[1], second[0], second[1])
        talata.append(linalg.det2([[D[first], cross_dot], [cross_dot, D[second]]]))
    four = _eighth(linalg.bordered_det(matrix("ABCD")))
    two = (
        dot2("A", "B", "C", "D"),
        dot2("A", "C", "B", "D"),
        dot2("A", "D", "B", "C"),
        dot2("A", "B", "A", "C"),
        dot2("A", "B", "A", "D"),
        dot2("A", "C", "A", "D"),
    )
    return CMDeterminants(three_point=three, talata=tuple(talata), four_point=four, two_point=two)


def _quarter(value):
    return value / 4 if isinstance(value, float) else value * Fraction(1, 4)


def _eighth(value):
    return value / 8 if isinstance(value, float) else value * Fraction(1, 8)


def euclidean_area_validity(f, tol: float = None) -> ValidityReport:
    """Classifies a 7-vector of areas without ever raising."""
    f = FacialAreas(*(float(value) for value in f))
    xi_tol = settings.XI_TOL if tol is None else tol
    tau_tol = settings.TAU_TOL if tol is None else tol
    s = f.s
    scale = max(s, max(f), 1e-300)
    xi = yetter_xi(f)
    min_tau = tau_table(f).minimum()
    F = f.squared()
    gramian = linalg.det3(vertex_gram(F, "A"))
    values, _ = linalg.sym_eigen(as_array(exterior_gram(F)))
    top = float(np.max(np.abs(values)))

    def report(validity, rank, reason=""):
        logger.debug(f"Area validity {validity.value} (rank {rank}): {reason}")
        return ValidityReport(
            validity=validity,
            xi=xi,
            min_tau=min_tau,
            gramian=gramian,
            rank=rank,
            eigenvalues=tuple(float(value) for value in values),
            reason=reason,
        )

    if top == 0.0:
        return report(AreaValidity.invalid, 0, "all areas vanish")
    if any(value < 0 for value in f):
        return report(AreaValidity.invalid, 0, "negative area")
    if abs(xi) > xi_tol * scale ** 2:
        return report(AreaValidity.invalid, 0, f"Yetter's identity violated (xi = {xi:.6g})")
    if min_tau < -tau_tol * scale:
        return report(AreaValidity.invalid, 0, f"tetrahedron inequality violated (min tau = {min_tau:.6g})")
    gram_tol = settings.GRAM_RANK_TOL if tol is None else max(tol, settings.GRAM_RANK_TOL)
    if float(values.min()) < -gram_tol * top:
        return report(AreaValidity.invalid, 0, f"areal Gram matrix is indefinite (gramian = {gramian:.6g})")
    rank = int(np.sum(values > gram_tol * top))
    if rank >= 3:
        return report(AreaValidity.non_degenerate_3d, 3)
    if rank == 2:
        return report(AreaValidity.rank2_degenerate, 2)
    return report(AreaValidity.rank1_planar, 1)


def bimedian_relations(t: Tetrahedron) -> dict:
    """
    Residuals of Minkowski's identity and of the interior vectors as signed sums of the
    signed exterior vectors v1 = AB×AC, v2 = −AB×AD, v3 = AC×AD, v4 = −BC×BD.
    """
    ext1, ext2, ext3, ext4, ab_cd, ac_bd, ad_bc = tetra_core.areal_vectors(t)
    v1, v2, v3, v4 = ext1, linalg.scale(-1, ext2), ext3, linalg.scale(-1, ext4)

    def gap(p, q):
        return linalg.sub(p, q)

    return {
        "minkowski": linalg.add(linalg.add(v1, v2), linalg.add(v3, v4)),
        "AB|CD": gap(ab_cd, linalg.scale(-1, linalg.add(v1, v2))),
        "AB|CD_alt": gap(ab_cd, linalg.add(v3, v4)),
        "AC|BD": gap(ac_bd, linalg.add(v1, v3)),
        "AC|BD_alt": gap(ac_bd, linalg.scale(-1, linalg.add(v2, v4))),
        "AD|BC": gap(ad_bc, linalg.add(v1, v4)),
        "AD|BC_alt": gap(ad_bc, linalg.scale(-1, linalg.add(v2, v3))),
    }


def interior_triple_product(t: Tetrahedron) -> tuple:
    """(AB×CD)·((AC×BD)×(AD×BC)) and 2(AB·(AC×AD))²."""
    _, _, _, _, ab_cd, ac_bd, ad_bc = tetra_core.areal_vectors(t)
    lhs = linalg.dot(ab_cd, linalg.cross(ac_bd, ad_bc))
    triple = tetra_core.triple_product(t)
    return lhs, 2 * triple * triple


def coordinate_cosine(t: Tetrahedron, edge: str):
    """(ab×ac)·(ab×ad) for the edge ab with remaining vertices c, d."""
    a, b = edge
    c, d = (label for label in "ABCD" if label not in edge)
    ab = linalg.sub(getattr(t, b), getattr(t, a))
    ac = linalg.sub(getattr(t, c), getattr(t, a))
    ad = linalg.sub(getattr(t, d), getattr(t, a))
    return linalg.dot(linalg.cross(ab, ac), linalg.cross(ab, ad))
