import logging
import math
import warnings

import numpy as np

from app.core.config import settings
from app.core.exceptions import ConditioningWarning, DegenerateParameters, NoSolution
from app.models.models import ABGDParams, CubicPsi, NaturalParams, TwoToTwoSolution
from app.services import degeneracy, natural_params

logger = logging.getLogger(__name__)

# vanishing Omega factor -> signs of (alpha, beta, gamma, delta)
SIGN_PATTERNS = {1: (1, 1, -1, -1), 2: (1, -1, 1, -1), 3: (1, -1, -1, 1)}


def abgd_from_natural(n, tol: float = None) -> ABGDParams:
    """
    alpha² = 2uvw/s, beta² = 2uxy/s, gamma² = 2vxz/s, delta² = 2wyz/s.
    Zeros of Omega get the signs of the collinear quadruple; anything else gets magnitudes only.
    """
    n = NaturalParams(*(max(float(value), 0.0) for value in n))
    s = n.s
    if s <= 0:
        return ABGDParams(0.0, 0.0, 0.0, 0.0, varsigma=0.0)
    u, v, w, x, y, z = n
    magnitudes = tuple(
        math.sqrt(2 * a * b * c / s) for a, b, c in ((u, v, w), (u, x, y), (v, x, z), (w, y, z))
    )
    tol = settings.OMEGA_TOL if tol is None else tol
    if abs(natural_params.omega(n)) > tol * (s / 2) ** 4:
        return ABGDParams(*magnitudes, varsigma=s)
    k = degeneracy.vanishing_factor(n, (1, 2, 3), tol)
    signed = tuple(sign * value for sign, value in zip(SIGN_PATTERNS[k], magnitudes))
    return ABGDParams(*signed, varsigma=s, sign_pattern=k)


def touch_distances(n) -> tuple:
    """Distances from A, B, C, D to the in-touch points on their faces: (alpha, beta, gamma, delta)/r."""
    n = NaturalParams(*(float(value) for value in n))
    r2 = natural_params.r_squared(n)
    if r2 <= 0:
        logging.error(f"touch_distances: in-radius vanishes for {tuple(n)}")
        raise DegenerateParameters("In-touch distances need a non-degenerate tetrahedron")
    abgd = abgd_from_natural(n)
    r = math.sqrt(r2)
    return tuple(abs(value) / r for value in (abgd.alpha, abgd.beta, abgd.gamma, abgd.delta))


def _require_generic(abgd: ABGDParams) -> None:
    squares = [value * value for value in (abgd.alpha, abgd.beta, abgd.gamma, abgd.delta)]
    tol = 1e-12 * max(max(squares), 1e-300)
    distinct = all(abs(a - b) > tol for i, a in enumerate(squares) for b in squares[i + 1:])
    if min(squares) <= tol or not distinct:
        logging.error(f"Parameters {squares} are not generic")
        raise DegenerateParameters("alpha², beta², gamma², delta² must be non-zero and distinct")


def psi_coefficients(abgd: ABGDParams, varsigma: float) -> tuple:
    a, b, g, d = abgd.alpha, abgd.beta, abgd.gamma, abgd.delta
    sigma = varsigma
    return (
        4 * g * d * (a - g) * (a - d) * (b - g) * (b - d),
        -2 * a * b * g * d * ((a - g) * (b - d) + (a - d) * (b - g)) * sigma,
        a * a * b * b * g * d * sigma * sigma,
        2 * a * a * b * b * (a - b) ** 2 * (g - d) ** 2 * sigma,
    )


def _discriminant(A, B, C, D) -> float:
    return 18 * A * B * C * D - 4 * B ** 3 * D + B * B * C * C - 4 * A * C ** 3 - 27 * A * A * D * D


def _polish(root: float, coefficients) -> float:
    A, B, C, D = coefficients
    value = ((A * root + B) * root + C) * root + D
    slope = (3 * A * root + 2 * B) * root + C
    if slope == 0:
        return root
    polished = root - value / slope
    logger.debug(f"Newton step moved root {root:.17g} by {polished - root:.3e}")
    return polished


def cubic_psi(abgd: ABGDParams, varsigma: float = None) -> CubicPsi:
    """Cubic in u left after eliminating v and w from the degenerate 2:2 equations."""
    _require_generic(abgd)
    sigma = abgd.varsigma if varsigma is None else varsigma
    if sigma is None or sigma <= 0:
        raise DegenerateParameters("The surface parameter must be positive")
    coefficients = psi_coefficients(abgd, sigma)
    A, B, C, D = coefficients
    if D <= 0 or A == 0:
        logging.error(f"cubic_psi: coefficients {coefficients} are not those of a generic cubic")
        raise DegenerateParameters("Cubic has a vanishing leading or non-positive constant coefficient")

    companion = np.array([[-B / A, -C / A, -D / A], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    eigenvalues = np.linalg.eigvals(companion)
    discriminant = _discriminant(A, B, C, D)
    if discriminant > 0:
        raw = sorted(float(value.real) for value in eigenvalues)
    else:
        raw = [float(min(eigenvalues, key=lambda value: abs(value.imag)).real)]
    roots = tuple(sorted(_polish(root, coefficients) for root in raw))

    clustered = False
    if len(roots) == 3:
        spread = max(abs(root) for root in roots)
        gap = min(roots[1] - roots[0], roots[2] - roots[1])
        clustered = gap <= settings.ROOT_CLUSTER_TOL * spread
    return CubicPsi(coefficients=coefficients, roots=roots, discriminant=discriminant, clustered=clustered)


def sigma_bound(abgd: ABGDParams) -> float:
    """The positive root in varsigma² of the cubic's discriminant divided by varsigma²."""
    _require_generic(abgd)
    A, b, c, d = psi_coefficients(abgd, 1.0)
    k2 = c * c * (b * b - 4 * A * c)
    k1 = 18 * A * b * c * d - 4 * b ** 3 * d
    k0 = -27 * A * A * d * d
    if k2 <= 0 or k0 >= 0:
        logging.error(f"sigma_bound: quadratic {k2:.6g}, {k1:.6g}, {k0:.6g} has no single positive root")
        raise DegenerateParameters("Parameters admit no lower bound on the surface parameter")
    root = math.sqrt(k1 * k1 - 4 * k2 * k0)
    if k1 > 0:
        return 2 * k0 / (-k1 - root)
    return (-k1 + root) / (2 * k2)


def _residual(n: NaturalParams, abgd: ABGDParams, sigma: float) -> float:
    scale = sigma / 2
    u, v, w, x, y, z = n
    targets = (abgd.alpha, abgd.beta, abgd.gamma, abgd.delta)
    products = (u * v * w, u * x * y, v * x * z, w * y * z)
    return max(
        abs(natural_params.omega(n)) / scale ** 4,
        abs(n.s - sigma) / sigma,
        max(abs(2 * p / sigma - t * t) for p, t in zip(products, targets)) / scale ** 2,
    )


def _pairing_residual(first: NaturalParams, second: NaturalParams) -> float:
    u, v, w, x, y, z = first
    u2, v2, w2, x2, y2, z2 = second
    return max(
        abs(u / u2 - z / z2) / (u / u2),
        abs(v / v2 - y / y2) / (v / v2),
        abs(w / w2 - x / x2) / (w / w2),
        abs(u * v * w / (u2 * v2 * w2) - 1),
    )


def solve_2to2(abgd: ABGDParams, varsigma: float = None) -> TwoToTwoSolution:
    """Degenerate natural parameters with the given signed (alpha, beta, gamma, delta) and surface varsigma."""
    sigma = abgd.varsigma if varsigma is None else varsigma
    bound = sigma_bound(abgd)
    if sigma is None or sigma <= 0 or sigma * sigma <= bound:
        logging.error(f"solve_2to2: varsigma² = {(sigma or 0.0) ** 2:.6g} is not above the bound {bound:.6g}")
        raise NoSolution("The surface parameter is below the solvability bound")
    psi = cubic_psi(abgd, sigma)
    tol = 1e-8
    if psi.clustered:
        warnings.warn(f"Roots of the cubic cluster: {psi.roots}", ConditioningWarning)
        logger.warning(f"Widening 2:2 verification tolerance for clustered roots {psi.roots}")
        tol *= 100

    a, b, g, d = abgd.alpha, abgd.beta, abgd.gamma, abgd.delta
    solutions, residuals = [], []
    for u in psi.roots:
        if u <= 0:
            continue
        v = (a * b * g * sigma - 2 * g * (a - g) * (b - d) * u) / (2 * b * (a - b) * (g - d))
        w = -(g * d * u + b * d * v) / (b * g)
        if v <= 0 or w <= 0:
            logger.debug(f"Root u = {u:.6g} back-substitutes to v = {v:.6g}, w = {w:.6g}")
            continue
        n = NaturalParams(u, v, w, w * b * g / (a * d), v * b * d / (a * g), u * g * d / (a * b))
        residual = _residual(n, abgd, sigma)
        if residual > tol:
            logger.warning(f"2:2 candidate {tuple(n)} misses its equations by {residual:.3e}")
            continue
        solutions.append(n)
        residuals.append(residual)

    pairing = _pairing_residual(*solutions) if len(solutions) == 2 else None
    if len(solutions) != 2:
        logger.warning(f"2:2 relation found {len(solutions)} positive solutions for {abgd}")
    return TwoToTwoSolution(
        solutions=tuple(solutions), roots=psi.roots, residuals=tuple(residuals), pairing_residual=pairing
    )
