import logging
import math

import numpy as np

from app.core.config import settings
from app.core.exceptions import ToleranceFailure

logger = logging.getLogger(__name__)


def add(a, b) -> tuple:
    return tuple(p + q for p, q in zip(a, b))


def sub(a, b) -> tuple:
    return tuple(p - q for p, q in zip(a, b))


def scale(k, a) -> tuple:
    return tuple(k * p for p in a)


def dot(a, b):
    return sum((p * q for p, q in zip(a, b)), 0)


def norm(a) -> float:
    return math.sqrt(float(dot(a, a)))


def cross(a, b) -> tuple:
    """Right-handed cross product of two 3-vectors."""
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def cross2(a, b):
    """z-component of the cross product of two planar vectors."""
    return a[0] * b[1] - a[1] * b[0]


def det2(M):
    return M[0][0] * M[1][1] - M[0][1] * M[1][0]


def det3(M):
    return (
        M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
        - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
        + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])
    )


def _minor(M, row: int, col: int) -> list:
    return [[M[i][j] for j in range(len(M)) if j != col] for i in range(len(M)) if i != row]


def det(M):
    """Determinant by cofactor expansion along the first row (exact for rational entries)."""
    size = len(M)
    if size == 1:
        return M[0][0]
    if size == 2:
        return det2(M)
    if size == 3:
        return det3(M)
    total = 0
    for col in range(size):
        if M[0][col] == 0:
            continue
        term = M[0][col] * det(_minor(M, 0, col))
        total = total + term if col % 2 == 0 else total - term
    return total


def det4(M):
    return det(M)


def adjugate3(M) -> list:
    """Transposed cofactor matrix, so that M·adj(M) = det(M)·I."""
    cof = [[0] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            sign = 1 if (i + j) % 2 == 0 else -1
            cof[i][j] = sign * det2(_minor(M, i, j))
    return [[cof[j][i] for j in range(3)] for i in range(3)]


def matmul(P, Q) -> list:
    return [[sum((P[i][k] * Q[k][j] for k in range(len(Q))), 0) for j in range(len(Q[0]))] for i in range(len(P))]


def bordered_det(D) -> object:
    """
    Determinant of the square matrix D bordered by a leading row and column of ones
    with a zero corner (the Cayley-Menger border).
    """
    size = len(D)
    bordered = [[0] + [1] * size]
    for i in range(size):
        bordered.append([1] + list(D[i]))
    return det(bordered)


def sym_eigen(M, max_sweeps: int = None):
    """
    Cyclic Jacobi eigen-decomposition of a small symmetric matrix.
    Returns eigenvalues sorted descending and orthonormal eigenvectors as columns.
    """
    max_sweeps = max_sweeps or settings.JACOBI_MAX_SWEEPS
    a = np.array(M, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"sym_eigen expects a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("sym_eigen received non-finite entries")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("sym_eigen expects a symmetric matrix")
    a = 0.5 * (a + a.T)
    size = a.shape[0]
    vectors = np.eye(size)
    magnitude = np.linalg.norm(a)
    threshold = size * np.finfo(float).eps * magnitude

    for sweep in range(max_sweeps + 1):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= threshold:
            logger.debug(f"Jacobi converged after {sweep} sweeps (off-norm {off:.3e})")
            break
        if sweep == max_sweeps:
            logging.error(f"Jacobi failed to converge in {max_sweeps} sweeps (off-norm {off:.3e})")
            raise ToleranceFailure(f"Jacobi eigen-solver did not converge in {max_sweeps} sweeps")
        for p in range(size - 1):
            for q in range(p + 1, size):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                g = 100.0 * abs(apq)
                # below the resolution of both diagonal entries
                if sweep > 3 and abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    a[p, q] = a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p, vec_q = vectors[:, p].copy(), vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def numeric_rank(M, rank_tol: float = None) -> int:
    rank_tol = settings.RANK_TOL if rank_tol is None else rank_tol
    values, _ = sym_eigen(M)
    top = float(np.max(np.abs(values))) if values.size else 0.0
    if top == 0.0:
        return 0
    return int(np.sum(np.abs(values) > rank_tol * top))


def pseudo_inverse(M, rank_tol: float = None) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric matrix through its eigen-decomposition."""
    rank_tol = settings.RANK_TOL if rank_tol is None else rank_tol
    values, vectors = sym_eigen(M)
    top = float(np.max(np.abs(values))) if values.size else 0.0
    inverted = np.zeros_like(values)
    if top > 0.0:
        keep = np.abs(values) > rank_tol * top
        inverted[keep] = 1.0 / values[keep]
    result = vectors @ np.diag(inverted) @ vectors.T
    return 0.5 * (result + result.T)
