import cmath
import logging
import math
from itertools import combinations, product

import numpy as np

from app.core.config import settings
from app.core.exceptions import DegenerateInput, NotDegenerate, ToleranceFailure, WrongRank
from app.models.models import (
    EDGES,
    NATURAL_KEYS,
    VERTICES,
    CollinearQuadruple,
    FacialAreas,
    LatticeNode,
    MNPair,
    NaturalParams,
    InverseParams,
    PluckerVector,
    SignedPositions,
    Tetrahedron,
    as_array,
)
from app.services import areal_identities, linalg, natural_params, tetra_core

logger = logging.getLogger(__name__)

# rows of the exterior Gram matrix (AB×AC, AD×AB, AC×AD, BD×BC) carry the squares of these vertices' complex numbers
_ROW_VERTICES = ("D", "C", "B", "A")

# sign of each of the four collinear positions per vanishing factor
_COLLINEAR_SIGNS = {0: (1, 1, 1, 1), 1: (1, 1, -1, -1), 2: (1, -1, 1, -1), 3: (1, -1, -1, 1)}

# sign of p_BC, p_BD, p_CD per vanishing factor; p_AB, p_AC, p_AD are always positive
_PLUCKER_SIGNS = {1: (1, -1, -1), 2: (1, 1, 1), 3: (-1, -1, 1)}


def _unit_axis(axis) -> tuple:
    axis = tuple(float(c) for c in axis)
    length = linalg.norm(axis)
    if len(axis) != 3 or length == 0.0:
        logging.error(f"squeeze: unusable axis {axis}")
        raise DegenerateInput("Squeeze axis must be a non-zero 3-vector")
    return linalg.scale(1.0 / length, axis)


def axis_frame(axis) -> np.ndarray:
    """Orthonormal rows whose last row is the unit axis."""
    a = np.array(_unit_axis(axis))
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    first = helper - np.dot(helper, a) * a
    first /= np.linalg.norm(first)
    return np.vstack([first, np.cross(a, first), a])


def squeeze_limit(t: Tetrahedron, axis=(0.0, 0.0, 1.0)) -> FacialAreas:
    """
    Areas in the limit σ → ∞ of squeezing by σ⁻¹ across the axis and stretching by σ along it.
    Each areal vector simply loses its component along the axis.
    """
    if tetra_core.is_degenerate(t):
        logging.error("squeeze_limit: input tetrahedron is already degenerate")
        raise DegenerateInput("squeeze_limit requires a non-degenerate tetrahedron")
    a = _unit_axis(axis)
    areas = []
    for vector in tetra_core.areal_vectors(t):
        projected = linalg.sub(vector, linalg.scale(linalg.dot(vector, a), a))
        areas.append(linalg.norm(projected))
    f = FacialAreas(*areas)
    logger.debug(f"Squeeze limit along {a}: {f}")
    return f


def squeeze_finite(t: Tetrahedron, sigma: float, axis=(0.0, 0.0, 1.0)) -> Tetrahedron:
    if not sigma > 0:
        logging.error(f"squeeze_finite: sigma = {sigma}")
        raise DegenerateInput("Squeeze factor must be positive")
    R = axis_frame(axis)
    M = R.T @ np.diag([1.0 / sigma, 1.0 / sigma, float(sigma)]) @ R
    return tetra_core.apply_affine(t, M.tolist())


def _rank(values: np.ndarray) -> int:
    top = float(np.max(np.abs(values))) if values.size else 0.0
    if top == 0.0:
        return 0
    return int(np.sum(values > settings.GRAM_RANK_TOL * top))


def _partition(edges) -> tuple:
    blocks = [{vertex} for vertex in VERTICES]
    for a, b in edges:
        first = next(block for block in blocks if a in block)
        second = next(block for block in blocks if b in block)
        if first is not second:
            first |= second
            blocks.remove(second)
    return tuple(sorted("".join(sorted(block)) for block in blocks))


def rank_and_lattice(params) -> LatticeNode:
    """Places a zero of Ω in the lattice; accepts seven areas or six natural parameters."""
    if len(params) == 7:
        f = FacialAreas(*(float(value) for value in params))
        n = natural_params.natural_from_areas(f)
    elif len(params) == 6:
        n = NaturalParams(*(float(value) for value in params))
        f = natural_params.areas_from_natural(n)
    else:
        raise ValueError(f"Expected 6 natural parameters or 7 areas, got {len(params)} values")

    values, _ = linalg.sym_eigen(as_array(areal_identities.vertex_gram(f.squared(), "A")))
    rank = _rank(values)
    s = float(n.s)
    if s <= 0:
        return LatticeNode(rank=rank, vanishing_complementary=frozenset(), consistent=False)

    omega = float(natural_params.omega(n))
    omega_scale = settings.OMEGA_TOL * (s / 2) ** 4
    if omega > omega_scale:
        return LatticeNode(
            rank=rank,
            vanishing_complementary=frozenset(),
            partition=VERTICES,
            level=0,
            nondegenerate=True,
        )

    products = natural_params.complementary_products(n)
    threshold = settings.COMPLEMENTARY_TOL * s * s
    vanishing = frozenset(key for key, value in zip(NATURAL_KEYS, products) if abs(value) <= threshold)
    vanishing_edges = [EDGES[NATURAL_KEYS.index(key)] for key in vanishing]
    partition = _partition(vanishing_edges)
    closed = all(
        a + b in vanishing_edges for block in partition for a, b in combinations(block, 2)
    )
    consistent = omega >= -omega_scale and closed and ((rank == 1) == (len(vanishing) == 6))
    if not consistent:
        logger.warning(f"Lattice placement of {tuple(n)} is inconsistent (rank {rank}, vanishing {sorted(vanishing)})")
    return LatticeNode(
        rank=rank,
        vanishing_complementary=vanishing,
        partition=partition,
        level=4 - len(partition),
        consistent=consistent,
    )


def _principal_sqrt(value: complex) -> complex:
    root = cmath.sqrt(value)
    if root.real == 0.0 and root.imag < 0.0:
        root = -root
    return root


def mn_from_degenerate(f) -> MNPair:
    """Splits the planar exterior areal vectors into squares of four complex numbers m + in."""
    f = FacialAreas(*(float(value) for value in f))
    values, vectors = linalg.sym_eigen(as_array(areal_identities.exterior_gram(f.squared())))
    top = float(np.max(np.abs(values)))
    rank = _rank(values)
    if top == 0.0 or float(values.min()) < -settings.GRAM_RANK_TOL * top or rank not in (1, 2):
        logging.error(f"mn_from_degenerate: exterior Gram eigenvalues {values}")
        raise WrongRank(f"Exterior areal vectors must span a line or a plane, got rank {rank}")

    W = vectors[:, :2] * np.sqrt(np.clip(values[:2], 0.0, None))
    if rank == 1:
        W[:, 1] = 0.0
    roots = {}
    for row, vertex in zip(W, _ROW_VERTICES):
        roots[vertex] = _principal_sqrt(complex(float(row[0]), float(row[1])))
    m = tuple(roots[vertex].real for vertex in VERTICES)
    n = tuple(roots[vertex].imag for vertex in VERTICES)

    s = f.s
    dot = linalg.dot(m, n)
    gaps = (abs(linalg.dot(m, m) - s / 2), abs(linalg.dot(n, n) - s / 2))
    if abs(dot) > 1e-9 * s or max(gaps) > 1e-9 * s:
        logging.error(f"mn_from_degenerate: m·n = {dot:.3e}, norm gaps {gaps}")
        raise ToleranceFailure("m and n are not orthogonal with equal norms")
    return MNPair(m=m, n=n, degenerate_n=rank == 1)


def interior_from_mn(mn: MNPair) -> tuple:
    """Squared interior areas (F_AB|CD, F_AC|BD, F_AD|BC) from m and n."""
    m = dict(zip(VERTICES, mn.m))
    n = dict(zip(VERTICES, mn.n))

    def pair(a, b):
        return ((m[b] + n[a]) ** 2 + (m[a] - n[b]) ** 2) * ((m[b] - n[a]) ** 2 + (m[a] + n[b]) ** 2)

    return pair("A", "B"), pair("A", "C"), pair("A", "D")


def plucker_from_mn(mn: MNPair) -> PluckerVector:
    m, n = mn.m, mn.n
    return PluckerVector(*(m[i] * n[j] - m[j] * n[i] for i, j in combinations(range(4), 2)))


def q_from_mn(mn: MNPair) -> PluckerVector:
    """Inner products q_ab = m_a m_b + n_a n_b, indexed like the Plücker coordinates."""
    m, n = mn.m, mn.n
    return PluckerVector(*(m[i] * m[j] + n[i] * n[j] for i, j in combinations(range(4), 2)))


def plucker_identity(p):
    p = PluckerVector(*p)
    return p.AB * p.CD - p.AC * p.BD + p.AD * p.BC


def natural_from_plucker(p, s) -> NaturalParams:
    p = PluckerVector(*p)
    return NaturalParams(*(2 * value * value / s for value in (p.CD, p.BD, p.BC, p.AD, p.AC, p.AB)))


def inverse_from_plucker(q, s) -> InverseParams:
    q = PluckerVector(*q)
    return InverseParams(*(2 * value * value / s for value in (q.CD, q.BD, q.BC, q.AD, q.AC, q.AB)))


def vanishing_factor(n: NaturalParams, candidates, tol: float) -> int:
    factors = natural_params.ptolemy_factors(n)
    k = min(candidates, key=lambda index: abs(factors[index]))
    scale = float(n.s) / 2
    if abs(factors[k]) > tol * scale:
        logging.error(f"Omega factors {factors} do not vanish for {tuple(n)}")
        raise NotDegenerate("Natural parameters are not a zero of Omega")
    logger.debug(f"Omega_{k} vanishes ({factors[k]:.3e}) for {tuple(n)}")
    return k


def plucker_from_natural(n, tol: float = None) -> PluckerVector:
    n = NaturalParams(*n)
    tol = settings.OMEGA_TOL if tol is None else tol
    k = vanishing_factor(n, (1, 2, 3), tol)
    u, v, w, x, y, z = (math.sqrt(max(float(value), 0.0)) for value in n)
    s_hat = math.sqrt(float(n.s) / 2)
    bc, bd, cd = _PLUCKER_SIGNS[k]
    return PluckerVector(*(s_hat * value for value in (z, y, x, bc * w, bd * v, cd * u)))


def z24_orbit(p) -> set:
    p = PluckerVector(*p)
    orbit = set()
    for e0, e1, e2, e3 in product((1, -1), repeat=4):
        orbit.add(PluckerVector(
            e0 * e1 * p.AB, e0 * e2 * p.AC, e0 * e3 * p.AD, e3 * p.BC, e2 * p.BD, e1 * p.CD
        ))
    return orbit


def collinear_quadruple(n, tol: float = None) -> CollinearQuadruple:
    """Positions of four points on a line whose squared gaps are the complementary products."""
    n = NaturalParams(*n)
    tol = settings.OMEGA_TOL if tol is None else tol
    s = float(n.s)
    if s <= 0:
        zeros = {edge: 0.0 for edge in EDGES}
        return CollinearQuadruple(positions=(0.0,) * 4, case=0, residuals=zeros, max_residual=0.0, consistent=True)

    k = vanishing_factor(n, (0, 1, 2, 3), tol)
    u, v, w, x, y, z = (math.sqrt(max(float(value), 0.0)) for value in n)
    s_hat = math.sqrt(s / 2)
    magnitudes = (u * v * w / s_hat, u * x * y / s_hat, v * x * z / s_hat, w * y * z / s_hat)
    positions = tuple(sign * value for sign, value in zip(_COLLINEAR_SIGNS[k], magnitudes))

    products = natural_params.complementary_products(n)
    residuals = {}
    for (i, j), edge, value in zip(combinations(range(4), 2), EDGES, products):
        residuals[edge] = (positions[i] - positions[j]) ** 2 - float(value)
    worst = max(abs(value) for value in residuals.values())
    consistent = worst <= settings.COMPLEMENTARY_TOL * s * s
    if not consistent:
        logger.warning(f"Collinear quadruple for {tuple(n)} misses the complementary products by {worst:.3e}")
    return CollinearQuadruple(
        positions=positions, case=k, residuals=residuals, max_residual=worst, consistent=consistent
    )


def signed_positions(mn: MNPair) -> SignedPositions:
    """Planar cross products of the exterior areal vectors rebuilt from m and n; each equals 2·p·q."""
    rows = {}
    for vertex, m, n in zip(VERTICES, mn.m, mn.n):
        rows[vertex] = (m * m - n * n, 2 * m * n)
    p = plucker_from_mn(mn)
    q = q_from_mn(mn)
    cross = {edge: linalg.cross2(rows[edge[0]], rows[edge[1]]) for edge in EDGES}
    pq_residual = {edge: cross[edge] - 2 * p[i] * q[i] for i, edge in enumerate(EDGES)}
    triple_sums = {}
    for vertex in VERTICES:
        triple_sums[vertex] = sum(
            linalg.cross2(rows[vertex], rows[other]) for other in VERTICES if other != vertex
        )
    return SignedPositions(cross=cross, pq_residual=pq_residual, triple_sums=triple_sums)
