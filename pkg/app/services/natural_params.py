import logging
import math
from fractions import Fraction
from itertools import combinations

import numpy as np

from app.core.config import settings
from app.core.exceptions import (
    DegenerateInput,
    DegenerateParameters,
    DegenerateSimplex,
    InvalidParameters,
    NegativeParameter,
    ToleranceFailure,
)
from app.models.models import (
    EDGE_FACES,
    EDGES,
    FacialAreas,
    IdentityReport,
    InverseParams,
    NaturalParams,
    SimplexReport,
    SquaredDistances,
    Tetrahedron,
)
from app.services import linalg

logger = logging.getLogger(__name__)

# edge -> (n_ab, n_cd, n_ac, n_ad, n_bc, n_bd) as indices into NaturalParams,
# i.e. the naturals seen from a vertex ordering (a, b, c, d) that starts with the edge
_EDGE_FRAME = {
    "AB": (0, 5, 1, 2, 3, 4),
    "AC": (1, 4, 0, 2, 3, 5),
    "AD": (2, 3, 0, 1, 4, 5),
    "BC": (3, 2, 0, 4, 1, 5),
    "BD": (4, 1, 0, 3, 2, 5),
    "CD": (5, 0, 1, 3, 2, 4),
}

# exterior face -> the three naturals of its edges
_FACE_EDGES = {"ABC": (0, 1, 3), "ABD": (0, 2, 4), "ACD": (1, 2, 5), "BCD": (3, 4, 5)}

# vertex -> (naturals of edges at the vertex, indices of faces summed, face subtracted)
_VERTEX_SUMS = {
    "A": ((0, 1, 2), (0, 1, 2), 3),
    "B": ((0, 3, 4), (0, 1, 3), 2),
    "C": ((1, 3, 5), (0, 2, 3), 1),
    "D": ((2, 4, 5), (1, 2, 3), 0),
}

# interior face -> (naturals in the linear sum, the opposite pair multiplied)
_INTERIOR_TERMS = (
    ((1, 2, 3, 4), (0, 5)),
    ((0, 2, 3, 5), (1, 4)),
    ((0, 1, 4, 5), (2, 3)),
)


def _div(numerator, denominator):
    # exact for int and Fraction operands
    if isinstance(numerator, float) or isinstance(denominator, float):
        return numerator / denominator
    return Fraction(numerator) / Fraction(denominator)


def natural_from_areas(f) -> NaturalParams:
    """u = Τ₀Τ₁/(2s) for the edge AB, and likewise for the other five edges."""
    f = FacialAreas(*f)
    s = f.s
    if s == 0:
        return NaturalParams(*([0] * 6))
    values = []
    for edge in EDGES:
        i, j, k = EDGE_FACES[edge]
        values.append(_div((f[i] + f[j]) ** 2 - f[k] ** 2, 2 * s))
    return NaturalParams(*values)


def inverse_from_areas(f) -> InverseParams:
    """ũ = Τ₂Τ₃/(2s) for the edge AB, and likewise for the other five edges."""
    f = FacialAreas(*f)
    s = f.s
    if s == 0:
        return InverseParams(*([0] * 6))
    values = []
    for edge in EDGES:
        i, j, k = EDGE_FACES[edge]
        values.append(_div(f[k] ** 2 - (f[i] - f[j]) ** 2, 2 * s))
    return InverseParams(*values)


def inverse_from_natural(n) -> InverseParams:
    n = NaturalParams(*n)
    s = n.s
    if s == 0:
        return InverseParams(*([0] * 6))
    values = []
    for edge in EDGES:
        ab, cd, ac, ad, bc, bd = (n[index] for index in _EDGE_FRAME[edge])
        values.append(_div(2 * ((ac + bc) * (ad + bd) - ab * cd), s))
    return InverseParams(*values)


def complementary_products(n, inverse=None) -> tuple:
    """(uũ, vṽ, ww̃, xx̃, yỹ, zz̃)."""
    n = NaturalParams(*n)
    inverse = inverse_from_natural(n) if inverse is None else inverse
    return tuple(a * b for a, b in zip(n, inverse))


def omega(n):
    u, v, w, x, y, z = n
    return (
        2 * v * w * x * y + 2 * u * w * x * z + 2 * u * v * y * z
        - u * u * z * z - v * v * y * y - w * w * x * x
    )


def hollow_matrix(n) -> list:
    u, v, w, x, y, z = n
    return [[0, u, v, w], [u, 0, x, y], [v, x, 0, z], [w, y, z, 0]]


def omega_determinant(n):
    return -linalg.det4(hollow_matrix(n))


def t4(n):
    """t⁴ = s²Ω."""
    n = NaturalParams(*n)
    return n.s ** 2 * omega(n)


def r4(n):
    n = NaturalParams(*n)
    return _div(omega(n), n.s ** 2)


def r_squared(n) -> float:
    n = NaturalParams(*n)
    value = float(omega(n))
    if value < 0:
        raise DegenerateParameters(f"Omega is negative ({value:.6g}); no real in-radius")
    return math.sqrt(value) / float(n.s)


def _clamped_roots(values, scale, what: str) -> list:
    roots = []
    for value in values:
        value = float(value)
        if value < 0:
            if value < -settings.CLAMP_TOL * scale:
                logging.error(f"{what}: negative radicand {value:.6g}")
                raise NegativeParameter(f"{what} requires non-negative parameters")
            logger.warning(f"{what}: clamping radicand {value:.3e} to zero")
            value = 0.0
        roots.append(math.sqrt(value))
    return roots


def ptolemy_factors(n) -> tuple:
    """(Ω₀, Ω₁, Ω₂, Ω₃) over the square roots of the naturals; their product is Ω."""
    n = NaturalParams(*n)
    scale = max(abs(float(value)) for value in n) or 1.0
    u, v, w, x, y, z = _clamped_roots(n, scale, "ptolemy_factors")
    p, q, r = u * z, v * y, w * x
    return (p + q + r, q + r - p, r + p - q, p + q - r)


def distances_from_natural(n, tol: float = None) -> SquaredDistances:
    """D_ab = n_ab·ñ_ab / r² with r² = √Ω/s."""
    n = NaturalParams(*n)
    tol = settings.OMEGA_TOL if tol is None else tol
    s = float(n.s)
    value = float(omega(n))
    # r² = √Ω/s must stay above tol·s
    if s <= 0 or value <= 0 or math.sqrt(value) <= tol * s * s:
        logging.error(f"distances_from_natural: Omega = {value:.6g} with s = {s:.6g}")
        raise DegenerateParameters("Natural parameters describe a tetrahedron of zero volume")
    r2 = math.sqrt(value) / s
    return SquaredDistances(*(float(product) / r2 for product in complementary_products(n)))


def squared_areas_from_natural(n) -> tuple:
    """F as polynomials in the naturals; Yetter's identity holds identically."""
    n = NaturalParams(*n)
    exterior = tuple(sum(n[i] for i in _FACE_EDGES[face]) ** 2 for face in ("ABC", "ABD", "ACD", "BCD"))
    interior = tuple(
        sum(n[i] for i in linear) ** 2 - 4 * n[pair[0]] * n[pair[1]]
        for linear, pair in _INTERIOR_TERMS
    )
    return exterior + interior


def areas_from_natural(n) -> FacialAreas:
    n = NaturalParams(*n)
    F = squared_areas_from_natural(n)
    exterior = tuple(sum(n[i] for i in _FACE_EDGES[face]) for face in ("ABC", "ABD", "ACD", "BCD"))
    scale = max(float(n.s) ** 2, 1e-300)
    interior = []
    for value in F[4:]:
        value = float(value)
        if value < 0:
            if value < -settings.CLAMP_TOL * scale:
                logging.error(f"areas_from_natural: negative interior radicand {value:.6g}")
                raise InvalidParameters("Natural parameters give a negative squared interior area")
            logger.warning(f"areas_from_natural: clamping radicand {value:.3e} to zero")
            value = 0.0
        interior.append(math.sqrt(value))
    return FacialAreas(*exterior, *interior)


def x_factor(n):
    u, v, w, x, y, z = n
    s = 2 * (u + v + w + x + y + z)
    return s * (u - z) * (v - y) * (w - x) * (u + v + w) * (u + x + y) * (v + x + z) * (w + y + z)


def heron_triangle(tangents):
    """Squared area of a triangle from its three tangent lengths: (a+b+c)·abc."""
    a, b, c = tangents
    return (a + b + c) * a * b * c


def vanishing_edge_check(n, tol: float = None) -> dict:
    """
    For every edge whose natural or inverse natural vanishes, the residual of
    Ω = −(n_ad n_bc − n_ac n_bd)² or Ω = −(n_ac n_ad − n_bc n_bd)² respectively.
    """
    n = NaturalParams(*n)
    tol = settings.VANISH_TOL if tol is None else tol
    inverse = inverse_from_natural(n)
    threshold = tol * abs(float(n.s))
    value = omega(n)
    report = {}
    for k, edge in enumerate(EDGES):
        ab, cd, ac, ad, bc, bd = (n[index] for index in _EDGE_FRAME[edge])
        if abs(float(ab)) <= threshold:
            report[(edge, "natural")] = value + (ad * bc - ac * bd) ** 2
        if abs(float(inverse[k])) <= threshold:
            report[(edge, "inverse")] = value + (ac * ad - bc * bd) ** 2
    return report


_LINEAR_IDENTITIES = ("natural_sum", "face_sums", "vertex_sums", "opposite_differences")

# opposite-edge pairs (natural indices) and the face indices added and subtracted in u − z
_DIFFERENCES = (((0, 5), (0, 1), (2, 3)), ((1, 4), (0, 2), (1, 3)), ((2, 3), (1, 2), (0, 3)))

# vertex -> edges of the opposite face, for the ex-sphere identities
_OPPOSITE_FACE_EDGES = {"A": (3, 4, 5), "B": (1, 2, 5), "C": (0, 2, 4), "D": (0, 1, 3)}


def identity_suite(n, f, tetra: Tetrahedron = None) -> IdentityReport:
    """
    Residuals of the identities linking naturals, inverse naturals and areas. All but
    the ex-sphere family hold for arbitrary f; those are only evaluated when Ξ vanishes.
    """
    # areal_identities imports tetra_core, which reaches back here lazily
    from app.services.areal_identities import areal_cosine_squared, coordinate_cosine, yetter_xi

    f = FacialAreas(*f)
    n = natural_from_areas(f) if n is None else NaturalParams(*n)
    inverse = inverse_from_areas(f)
    s = f.s
    if s == 0:
        return IdentityReport(residuals={}, relative={}, max_relative=0.0)
    xi = yetter_xi(f)
    F = f.squared()
    half_xi_over_s = _div(xi, 2 * s)

    residuals = {}
    residuals["natural_sum"] = (2 * sum(n) - (s + 2 * _div(xi, s)),)
    residuals["face_sums"] = tuple(
        sum(n[i] for i in _FACE_EDGES[face]) - (f[k] + half_xi_over_s)
        for k, face in enumerate(("ABC", "ABD", "ACD", "BCD"))
    )
    residuals["vertex_sums"] = tuple(
        sum(n[i] for i in edges) - (_div(sum(f[i] for i in faces) - f[minus], 2) + half_xi_over_s)
        for edges, faces, minus in _VERTEX_SUMS.values()
    )
    residuals["opposite_differences"] = tuple(
        n[a] - n[b] - _div(f[plus[0]] + f[plus[1]] - f[minus[0]] - f[minus[1]], 2)
        for (a, b), plus, minus in _DIFFERENCES
    )
    residuals["interior_areas"] = tuple(
        (sum(n[i] for i in linear) - _div(xi, s)) ** 2 - 4 * n[pair[0]] * n[pair[1]] - F[4 + k]
        for k, (linear, pair) in enumerate(_INTERIOR_TERMS)
    )
    residuals["complementary_sums"] = tuple(
        (n[k] + inverse[k]) * s - 2 * f[EDGE_FACES[edge][0]] * f[EDGE_FACES[edge][1]]
        for k, edge in enumerate(EDGES)
    )
    residuals["areal_cosines"] = tuple(
        _div((n[k] - inverse[k]) * s, 2) - areal_cosine_squared(F, edge) for k, edge in enumerate(EDGES)
    )
    if tetra is not None:
        residuals["areal_cosines_coordinates"] = tuple(
            _div((n[k] - inverse[k]) * s, 2) - coordinate_cosine(tetra, edge) for k, edge in enumerate(EDGES)
        )
    residuals["inverse_sum"] = (s * s - 2 * sum(inverse) * s - (2 * sum(F[4:]) + 4 * xi),)
    if abs(float(xi)) <= settings.XI_TOL * float(s) ** 2:
        residuals["exsphere"] = tuple(
            sum(inverse[i] for i in _OPPOSITE_FACE_EDGES[vertex]) * s
            - 2 * sum(n[i] for i in edges) * sum(n[i] for i in _OPPOSITE_FACE_EDGES[vertex])
            for vertex, (edges, _, _) in _VERTEX_SUMS.items()
        )

    linear_scale, quadratic_scale = abs(float(s)), float(s) ** 2
    relative = {}
    for name, values in residuals.items():
        scale = linear_scale if name in _LINEAR_IDENTITIES else quadratic_scale
        relative[name] = max(abs(float(value)) for value in values) / scale
    worst = max(relative.values())
    logger.debug(f"Identity suite worst relative residual {worst:.3e}")
    return IdentityReport(residuals=residuals, relative=relative, max_relative=worst)


def _measure(edges: np.ndarray) -> float:
    """k!·(k-volume) of the simplex spanned by k edge vectors."""
    gram = edges @ edges.T
    return math.sqrt(max(float(np.linalg.det(gram)), 0.0))


def _rational_sqrt(value):
    value = Fraction(value)
    if value < 0:
        return None
    top, bottom = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if top * top == value.numerator and bottom * bottom == value.denominator:
        return Fraction(top, bottom)
    return None


def _exact_triangle_check(vertices):
    """The two-dimensional check in rationals; None unless every coordinate and side length is rational."""
    if len(vertices) != 3 or any(len(p) != 2 for p in vertices):
        return None
    if not all(isinstance(c, (int, Fraction)) and not isinstance(c, bool) for p in vertices for c in p):
        return None
    points = [tuple(Fraction(c) for c in p) for p in vertices]
    sides = {}
    for i, j in combinations(range(3), 2):
        gap = linalg.sub(points[i], points[j])
        side = _rational_sqrt(linalg.dot(gap, gap))
        if side is None:
            logger.debug("n-simplex check: irrational side length, using floats")
            return None
        sides[(i, j)] = sides[(j, i)] = side

    content = abs(linalg.det2([linalg.sub(points[1], points[0]), linalg.sub(points[2], points[0])]))
    if content == 0:
        logging.error(f"nsimplex_conjecture_check: collinear triangle {points}")
        raise DegenerateSimplex("Simplex has zero volume")
    naturals = {}
    H = [[Fraction(0)] * 3 for _ in range(3)]
    for i, j in combinations(range(3), 2):
        k = 3 - i - j
        # tangent length from the vertex shared by the facets opposite i and j
        H[i][j] = H[j][i] = naturals[(i, j)] = (sides[(k, i)] + sides[(k, j)] - sides[(i, j)]) / 2
    lhs = content ** 2
    rhs = 2 * sum(naturals.values()) * linalg.det3(H)
    return SimplexReport(
        dim=2, naturals=naturals, lhs=lhs, rhs=rhs, residual=abs(lhs - rhs) / lhs, pair_residual=Fraction(0)
    )


def nsimplex_conjecture_check(dim: int, vertices) -> SimplexReport:
    """
    (n!V)^(2(n−1)) against (−1)^n (2Σ)^(n−1) det H, where H is hollow symmetric and
    H[i][j] is (n−1)! times the hyper-area of the contact simplex on the (n−2)-face
    shared by the facets opposite vertices i and j. Rational triangles with rational
    sides are checked exactly.
    """
    if dim not in (2, 3, 4):
        raise DegenerateInput(f"Dimension {dim} is not supported (2, 3 or 4)")
    if dim == 2:
        exact = _exact_triangle_check(vertices)
        if exact is not None:
            return exact
    points = np.asarray(vertices, dtype=float)
    if points.shape != (dim + 1, dim) or not np.all(np.isfinite(points)):
        raise DegenerateInput(f"Expected {dim + 1} finite points in R^{dim}, got shape {points.shape}")

    edges = points[1:] - points[0]
    content = abs(float(np.linalg.det(edges)))  # n!·V
    length = max(float(np.linalg.norm(points[i] - points[j])) for i, j in combinations(range(dim + 1), 2))
    if content <= settings.DEGENERATE_VOLUME_TOL * length ** dim:
        logging.error(f"nsimplex_conjecture_check: content {content:.3e} for edge scale {length:.3e}")
        raise DegenerateSimplex("Simplex has zero volume")

    facets = [[k for k in range(dim + 1) if k != i] for i in range(dim + 1)]
    weights = np.array([_measure(points[facet[1:]] - points[facet[0]]) for facet in facets])
    center = weights @ points / weights.sum()
    radius = content / weights.sum()  # n·V / Σ facet areas with the factorials cancelled

    touch = []
    for i, facet in enumerate(facets):
        anchor = points[facet[0]]
        basis = points[facet[1:]] - anchor
        coefficients, *_ = np.linalg.lstsq(basis.T, center - anchor, rcond=None)
        foot = anchor + basis.T @ coefficients
        distance = float(np.linalg.norm(center - foot))
        if abs(distance - radius) > 1e-8 * radius:
            logging.error(f"In-center distance {distance} to facet {i} differs from r = {radius}")
            raise ToleranceFailure(f"In-sphere is not tangent to facet {i}")
        touch.append(foot)

    naturals = {}
    pair_residual = 0.0
    H = np.zeros((dim + 1, dim + 1))
    for i, j in combinations(range(dim + 1), 2):
        shared = points[[k for k in range(dim + 1) if k not in (i, j)]]
        first = _measure(np.vstack([shared[1:], touch[i][None, :]]) - shared[0])
        second = _measure(np.vstack([shared[1:], touch[j][None, :]]) - shared[0])
        pair_residual = max(pair_residual, abs(first - second) / max(first, second, 1e-300))
        H[i, j] = H[j, i] = naturals[(i, j)] = 0.5 * (first + second)

    total = sum(naturals.values())
    lhs = content ** (2 * (dim - 1))
    rhs = (-1) ** dim * (2 * total) ** (dim - 1) * float(np.linalg.det(H))
    residual = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    logger.debug(f"n-simplex check in dimension {dim}: lhs {lhs:.6g} rhs {rhs:.6g}")
    return SimplexReport(
        dim=dim, naturals=naturals, lhs=lhs, rhs=rhs, residual=residual, pair_residual=pair_residual
    )
