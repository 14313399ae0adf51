import logging
import math
from fractions import Fraction
from itertools import combinations, product

from app.core.config import settings
from app.core.exceptions import CoincidentPoints, DegenerateBase, InconsistentAreas, NotRank1
from app.models.models import (
    CanonicalPlanarConfig,
    FacialAreas,
    NaturalParams,
    PlanarClass,
    SquaredDistances,
)
from app.services import areal_identities, linalg, natural_params, reconstruction

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)

# chirotope case -> signs of the barycentric coordinates (alpha_B, alpha_C, alpha_D) of A versus BCD
CASE_SIGNS = (
    (1, 1, 1),  # A inside BCD
    (1, -1, -1),  # B inside ACD
    (-1, 1, -1),  # C inside ABD
    (-1, -1, 1),  # D inside ABC
    (-1, 1, 1),  # convex, diagonals AB and CD
    (1, -1, 1),  # convex, diagonals AC and BD
    (1, 1, -1),  # convex, diagonals AD and BC
)

# chirotope case -> (indices of vanishing naturals, indices of vanishing inverse naturals)
CASE_PATTERNS = (
    ({0, 1, 2}, {3, 4, 5}),
    ({0, 3, 4}, {1, 2, 5}),
    ({1, 3, 5}, {0, 2, 4}),
    ({2, 4, 5}, {0, 1, 3}),
    ({0, 5}, {1, 2, 3, 4}),
    ({1, 4}, {0, 2, 3, 5}),
    ({2, 3}, {0, 1, 4, 5}),
)


def _class_table() -> dict:
    """class id -> (barycentric signs, signs of 1 − alpha)."""
    table = {}
    for case, signs in enumerate(CASE_SIGNS):
        positives = [k for k in range(3) if signs[k] > 0]
        if case < 4:
            sigma = tuple(-1 if signs[k] > 0 and len(positives) == 1 else 1 for k in range(3))
            table[case] = (signs, sigma)
            continue
        j, k = positives
        for bits in range(4):
            sigma = [1, 1, 1]
            if bits & 1:
                sigma[j] = -1
            if bits & 2:
                sigma[k] = -1
            table[4 * (case - 3) + bits] = (signs, tuple(sigma))
    return table


CLASS_SIGNS = _class_table()
_CLASS_BY_SIGNS = {value: class_id for class_id, value in CLASS_SIGNS.items()}


def chirotope_case(signs) -> int:
    signs = tuple(1 if value > 0 else -1 for value in signs)
    if signs not in CASE_SIGNS:
        raise ValueError(f"No planar configuration has barycentric signs {signs}")
    return CASE_SIGNS.index(signs)


def signed_sums(class_id: int) -> tuple:
    """Per exterior face (ABC, ABD, ACD, BCD) the coefficients of the three interior areas."""
    (a_B, a_C, a_D), (s1, s2, s3) = CLASS_SIGNS[class_id]
    return (
        (a_D * s1, a_D * s2, -a_D * s3),
        (a_C * s1, -a_C * s2, a_C * s3),
        (-a_B * s1, a_B * s2, a_B * s3),
        (s1, s2, s3),
    )


def planar_class(class_id: int, candidates: tuple = ()) -> PlanarClass:
    if class_id not in CLASS_SIGNS:
        raise ValueError(f"Planar classes are numbered 0..15, got {class_id}")
    signs, _ = CLASS_SIGNS[class_id]
    return PlanarClass(
        class_id=class_id,
        chirotope_case=chirotope_case(signs),
        signs=signs,
        signed_sums=signed_sums(class_id),
        candidates=candidates or (class_id,),
    )


def _candidates(cases, magnitudes, near_one) -> tuple:
    found = set()
    for case in cases:
        signs = CASE_SIGNS[case]
        options = []
        for k in range(3):
            if signs[k] < 0:
                options.append((1,))
            elif near_one[k]:
                options.append((1, -1))
            else:
                options.append((-1,) if magnitudes[k] > 1 else (1,))
        for sigma in product(*options):
            class_id = _CLASS_BY_SIGNS.get((signs, sigma))
            if class_id is not None:
                found.add(class_id)
    return tuple(sorted(found))


def classify_planar(n, inverse=None) -> PlanarClass:
    """Class of a rank-1 configuration from which natural and inverse natural parameters vanish."""
    n = NaturalParams(*(float(value) for value in n))
    s = n.s
    if s <= 0:
        logging.error("classify_planar: all natural parameters vanish")
        raise NotRank1("Natural parameters of a planar configuration cannot all vanish")
    inverse = natural_params.inverse_from_natural(n) if inverse is None else inverse
    products = natural_params.complementary_products(n, inverse)
    if max(abs(float(value)) for value in products) > settings.COMPLEMENTARY_TOL * s * s:
        logging.error(f"classify_planar: complementary products {products} do not all vanish")
        raise NotRank1("Configuration is not planar: some complementary product is non-zero")

    tol = settings.VANISH_TOL * s
    zero_naturals = {i for i, value in enumerate(n) if abs(value) <= tol}
    zero_inverses = {i for i, value in enumerate(inverse) if abs(float(value)) <= tol}
    cases = [
        case for case, (naturals, inverses) in enumerate(CASE_PATTERNS)
        if naturals <= zero_naturals and inverses <= zero_inverses
    ]
    if not cases:
        logging.error(f"classify_planar: vanishing pattern {zero_naturals}/{zero_inverses} matches no case")
        raise NotRank1("Vanishing parameters match no planar configuration")

    f = natural_params.areas_from_natural(n)
    base = f.BCD
    if base <= tol:
        logging.error(f"classify_planar: base triangle area {base:.3e} vanishes")
        raise DegenerateBase("Base triangle BCD has vanishing area")
    faces = (f.ACD, f.ABD, f.ABC)
    magnitudes = tuple(value / base for value in faces)
    near_one = tuple(abs(value - base) <= tol for value in faces)
    candidates = _candidates(cases, magnitudes, near_one)
    if not candidates:
        logging.error(f"classify_planar: no class fits cases {cases} with |alpha| = {magnitudes}")
        raise NotRank1("Areas are inconsistent with every planar class")
    logger.debug(f"Planar cases {cases}, class candidates {candidates}")
    return planar_class(candidates[0], candidates)


def exterior_from_interior(class_id: int, interior) -> tuple:
    """Exterior areas (ABC, ABD, ACD, BCD) as the class's signed half-sums of the interior areas."""
    interior = tuple(interior)
    scale = sum(abs(float(value)) for value in interior)
    values = []
    for coefficients in signed_sums(class_id):
        total = sum(c * value for c, value in zip(coefficients, interior))
        total = total / 2 if isinstance(total, float) else total * HALF
        if total < 0:
            if total < -settings.VANISH_TOL * scale:
                logging.error(f"exterior_from_interior: class {class_id} gives negative area {float(total):.6g}")
                raise InconsistentAreas(f"Interior areas {interior} do not fit planar class {class_id}")
            total = total * 0
        values.append(total)
    return tuple(values)


def barycentric_from_areas(f, class_id: int) -> tuple:
    """(alpha_B, alpha_C, alpha_D) of A versus BCD: magnitudes from area ratios, signs from the class."""
    f = FacialAreas(*(float(value) for value in f))
    if f.BCD <= settings.VANISH_TOL * max(f.s, 1e-300):
        logging.error(f"barycentric_from_areas: base area {f.BCD:.3e}")
        raise DegenerateBase("Base triangle BCD has vanishing area")
    signs, _ = CLASS_SIGNS[class_id]
    alpha = tuple(sign * value / f.BCD for sign, value in zip(signs, (f.ACD, f.ABD, f.ABC)))
    total = sum(alpha)
    if abs(total - 1.0) > settings.VANISH_TOL * max(1.0, sum(abs(value) for value in alpha)):
        logging.error(f"barycentric_from_areas: coordinates {alpha} sum to {total}")
        raise InconsistentAreas(f"Areas do not fit planar class {class_id}")
    return alpha


def region_class(a, bcd) -> tuple:
    """
    Candidate classes of the point a relative to the triangle bcd, read off the lines through
    the triangle's edges and the lines through each vertex parallel to the opposite edge.
    A point on one of those lines gets every adjacent class.
    """
    a = tuple(float(c) for c in a)
    b, c, d = (tuple(float(x) for x in p) for p in bcd)
    area = linalg.cross2(linalg.sub(c, b), linalg.sub(d, b))
    scale = max(linalg.norm(linalg.sub(p, q)) ** 2 for p, q in combinations((b, c, d), 2))
    if abs(area) <= settings.VANISH_TOL * scale:
        raise DegenerateBase("Reference triangle is degenerate")
    alpha = (
        linalg.cross2(linalg.sub(c, a), linalg.sub(d, a)) / area,
        linalg.cross2(linalg.sub(a, b), linalg.sub(d, b)) / area,
        linalg.cross2(linalg.sub(c, b), linalg.sub(a, b)) / area,
    )
    tol = 1e-12
    sign_options = [(1, -1) if abs(value) <= tol else ((1,) if value > 0 else (-1,)) for value in alpha]
    sigma_options = [(1, -1) if abs(1 - value) <= tol else ((1,) if value < 1 else (-1,)) for value in alpha]
    found = set()
    for signs in product(*sign_options):
        for sigma in product(*sigma_options):
            class_id = _CLASS_BY_SIGNS.get((signs, sigma))
            if class_id is not None:
                found.add(class_id)
    return tuple(sorted(found))


def _canonical_form(sequence: tuple) -> tuple:
    variants = []
    for ordered in (sequence, tuple(reversed(sequence))):
        for base in (ordered, tuple(p[::-1] for p in ordered)):
            variants.extend(base[k:] + base[:k] for k in range(len(base)))
    return min(variants)


def allowable_sequence(points, labels: str = "ABCD") -> tuple:
    """
    Periodic sequence of label orders seen by projecting the points onto a line rotated through
    a full turn, in its lexicographically least form up to rotation, inversion and reversal.
    """
    pts = [tuple(float(c) for c in p) for p in points]
    scale = max(linalg.norm(linalg.sub(p, q)) for p, q in combinations(pts, 2))
    angles = []
    for (i, p), (j, q) in combinations(enumerate(pts), 2):
        gap = linalg.sub(q, p)
        if linalg.norm(gap) <= 1e-12 * max(scale, 1e-300):
            logging.error(f"allowable_sequence: points {labels[i]} and {labels[j]} coincide")
            raise CoincidentPoints(f"Points {labels[i]} and {labels[j]} coincide")
        phi = math.atan2(gap[1], gap[0])
        angles.extend(((phi + math.pi / 2) % (2 * math.pi), (phi - math.pi / 2) % (2 * math.pi)))

    critical = []
    for angle in sorted(angles):
        if not critical or angle - critical[-1] > 1e-9:
            critical.append(angle)
    if len(critical) > 1 and critical[0] + 2 * math.pi - critical[-1] <= 1e-9:
        critical.pop()

    sequence = []
    for k, angle in enumerate(critical):
        following = critical[k + 1] if k + 1 < len(critical) else critical[0] + 2 * math.pi
        theta = (angle + following) / 2
        direction = (math.cos(theta), math.sin(theta))
        order = sorted(range(len(pts)), key=lambda index: linalg.dot(pts[index], direction))
        sequence.append("".join(labels[index] for index in order))
    return _canonical_form(tuple(sequence))


def rho_coefficients(alpha) -> tuple:
    """Weights of |BC|², |BD|², |CD|² in the squared radius of gyration."""
    b, c, d = alpha
    return (
        (2 * b * b + 2 * c * c + d * d + b * c + 3 * b * d + 3 * c * d) / 16,
        (2 * b * b + c * c + 2 * d * d + 3 * b * c + b * d + 3 * c * d) / 16,
        (b * b + 2 * c * c + 2 * d * d + 3 * b * c + 3 * b * d + c * d) / 16,
    )


def _schoenberg(base, dB, dC, dD):
    D_BC, D_BD, D_CD = base
    return -(dB * dC * D_BC + dB * dD * D_BD + dC * dD * D_CD)


def canonical_planar(F, class_id: int = None) -> CanonicalPlanarConfig:
    """Planar configuration with the given squared areas and the least radius of gyration."""
    F = tuple(float(value) for value in F)
    f = FacialAreas(*(math.sqrt(max(value, 0.0)) for value in F))
    if class_id is None:
        class_id = classify_planar(natural_params.natural_from_areas(f)).class_id
    alpha = barycentric_from_areas(f, class_id)
    rho_BC, rho_BD, rho_CD = rho_coefficients(alpha)
    pair_sum = rho_BC * rho_BD + rho_BC * rho_CD + rho_BD * rho_CD
    if pair_sum <= 0:
        logging.error(f"canonical_planar: rho coefficients {(rho_BC, rho_BD, rho_CD)} admit no triangle")
        raise InconsistentAreas("Barycentric coordinates admit no base triangle")
    zeta = f.BCD / math.sqrt(pair_sum)
    base = (zeta * (rho_BD + rho_CD), zeta * (rho_BC + rho_CD), zeta * (rho_BC + rho_BD))
    a_B, a_C, a_D = alpha
    d_star = SquaredDistances(
        _schoenberg(base, a_B - 1, a_C, a_D),
        _schoenberg(base, a_B, a_C - 1, a_D),
        _schoenberg(base, a_B, a_C, a_D - 1),
        *base,
    )

    dets = areal_identities.cm_determinants(d_star)
    achieved = dets.three_point + dets.talata
    residual = max(abs(a - b) for a, b in zip(achieved, F)) / max(max(F), 1e-300)
    if residual > 1e-7:
        logging.error(f"canonical_planar: determinants miss the squared areas by {residual:.3e}")
        raise InconsistentAreas(f"Squared areas are not those of a class-{class_id} planar configuration")
    points = reconstruction.coords_from_distances(d_star, dim=2)
    logger.debug(f"Canonical planar configuration for class {class_id}: gyration {sum(d_star) / 16:.6g}")
    return CanonicalPlanarConfig(
        d_star=d_star,
        coordinates=tuple(points),
        gyration=sum(d_star) / 16,
        rho=(rho_BC, rho_BD, rho_CD),
        residual=residual,
    )


def gradient_residual(config: CanonicalPlanarConfig) -> float:
    """How far the rho weights are from parallel to the gradient of the base triangle's area."""
    _, _, _, D_BC, D_BD, D_CD = config.d_star
    gradient = (D_BD + D_CD - D_BC, D_CD + D_BC - D_BD, D_BC + D_BD - D_CD)
    multiplier = sum(config.rho) / (D_BC + D_BD + D_CD)
    gap = [r - multiplier * g for r, g in zip(config.rho, gradient)]
    return linalg.norm(gap) / max(linalg.norm(config.rho), 1e-300)
