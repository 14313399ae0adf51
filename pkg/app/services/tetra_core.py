import logging
import math

from app.core.config import settings
from app.core.exceptions import DegenerateTetrahedron, ExSphereUndefined, ToleranceFailure
from app.models.models import (
    EDGES,
    ExSphere,
    FacialAreas,
    InTouchData,
    MedialOctahedron,
    NaturalParams,
    SquaredDistances,
    Tetrahedron,
)
from app.services.linalg import add, cross, dot, norm, scale, sub

logger = logging.getLogger(__name__)

# face name -> (its three vertex labels, the opposite vertex)
FACE_VERTICES = {
    "ABC": ("ABC", "D"),
    "ABD": ("ABD", "C"),
    "ACD": ("ACD", "B"),
    "BCD": ("BCD", "A"),
}


def _point(t: Tetrahedron, label: str):
    return getattr(t, label)


def edge_vectors(t: Tetrahedron) -> dict:
    return {edge: sub(_point(t, edge[1]), _point(t, edge[0])) for edge in EDGES}


def triple_product(t: Tetrahedron):
    """AB·(AC×AD), signed."""
    e = edge_vectors(t)
    return dot(e["AB"], cross(e["AC"], e["AD"]))


def orientation(t: Tetrahedron) -> int:
    value = triple_product(t)
    return (value > 0) - (value < 0)


def volume_t(t: Tetrahedron):
    """t = 6 * volume."""
    return abs(triple_product(t))


def squared_distances(t: Tetrahedron) -> SquaredDistances:
    e = edge_vectors(t)
    return SquaredDistances(*(dot(e[edge], e[edge]) for edge in EDGES))


def max_edge_length(t: Tetrahedron) -> float:
    return math.sqrt(float(max(squared_distances(t))))


def areal_vectors(t: Tetrahedron) -> tuple:
    """
    Exterior doubled areal vectors AB×AC, AB×AD, AC×AD, BC×BD followed by the
    interior quadrupled ones AB×CD, AC×BD, AD×BC.
    """
    e = edge_vectors(t)
    return (
        cross(e["AB"], e["AC"]),
        cross(e["AB"], e["AD"]),
        cross(e["AC"], e["AD"]),
        cross(e["BC"], e["BD"]),
        cross(e["AB"], e["CD"]),
        cross(e["AC"], e["BD"]),
        cross(e["AD"], e["BC"]),
    )


def squared_facial_areas(t: Tetrahedron) -> tuple:
    """F = f² straight from the areal vectors, exact for rational coordinates."""
    return tuple(dot(vector, vector) for vector in areal_vectors(t))


def facial_areas(t: Tetrahedron) -> FacialAreas:
    return FacialAreas(*(norm(vector) for vector in areal_vectors(t)))


def is_degenerate(t: Tetrahedron, tol: float = None) -> bool:
    tol = settings.DEGENERATE_VOLUME_TOL if tol is None else tol
    return float(volume_t(t)) <= tol * max_edge_length(t) ** 3


def _require_nondegenerate(t: Tetrahedron, what: str) -> None:
    if is_degenerate(t):
        logging.error(f"{what}: tetrahedron volume below tolerance (t = {float(volume_t(t)):.3e})")
        raise DegenerateTetrahedron(f"{what} requires a non-degenerate tetrahedron")


def face_normals(t: Tetrahedron) -> dict:
    """Outward unit normals, pointing away from the opposite vertex."""
    normals = {}
    for face, (labels, opposite) in FACE_VERTICES.items():
        a, b, c = (_point(t, label) for label in labels)
        n = cross(sub(b, a), sub(c, a))
        length = norm(n)
        if length == 0.0:
            raise DegenerateTetrahedron(f"Face {face} has zero area")
        n = scale(1.0 / length, n)
        centroid = scale(1.0 / 3.0, add(add(a, b), c))
        if dot(n, sub(centroid, _point(t, opposite))) < 0:
            n = scale(-1.0, n)
        normals[face] = n
    return normals


def _foot_on_face(t: Tetrahedron, face: str, point, normal) -> tuple:
    anchor = _point(t, FACE_VERTICES[face][0][0])
    offset = dot(sub(point, anchor), normal)
    return sub(point, scale(offset, normal))


def in_touch(t: Tetrahedron) -> InTouchData:
    _require_nondegenerate(t, "in_touch")
    f = facial_areas(t)
    s = f.s
    weights = {"A": f.BCD, "B": f.ACD, "C": f.ABD, "D": f.ABC}
    center = (0.0, 0.0, 0.0)
    for label, weight in weights.items():
        center = add(center, scale(weight / s, _point(t, label)))
    r = float(volume_t(t)) / s

    normals = face_normals(t)
    touch = {}
    for face, normal in normals.items():
        anchor = _point(t, FACE_VERTICES[face][0][0])
        distance = -dot(sub(center, anchor), normal)
        if abs(distance - r) > 1e-9 * max(r, 1e-300):
            logging.error(f"In-center distance to {face} is {distance} but r = {r}")
            raise ToleranceFailure(f"In-sphere is not tangent to face {face}")
        touch[face] = _foot_on_face(t, face, center, normal)

    return InTouchData(
        in_center=center,
        in_radius=r,
        J=touch["BCD"],
        K=touch["ACD"],
        L=touch["ABD"],
        N=touch["ABC"],
    )


# edge -> touch points of the two faces sharing it
_EDGE_TOUCH = {
    "AB": ("N", "L"),
    "AC": ("N", "K"),
    "AD": ("L", "K"),
    "BC": ("N", "J"),
    "BD": ("L", "J"),
    "CD": ("K", "J"),
}


def _doubled_triangle_area(a, b, c) -> float:
    return norm(cross(sub(b, a), sub(c, a)))


def contact_triangle_areas(t: Tetrahedron) -> NaturalParams:
    """Doubled areas of the six congruent pairs of contact triangles cut out by the in-touch points."""
    data = in_touch(t)
    scale_sq = max_edge_length(t) ** 2
    values = []
    for edge in EDGES:
        a, b = _point(t, edge[0]), _point(t, edge[1])
        first, second = (getattr(data, name) for name in _EDGE_TOUCH[edge])
        area_first = _doubled_triangle_area(a, b, first)
        area_second = _doubled_triangle_area(a, b, second)
        if abs(area_first - area_second) > 1e-8 * max(area_first, area_second) + 1e-13 * scale_sq:
            logging.error(f"Contact triangles on edge {edge} differ: {area_first} vs {area_second}")
            raise ToleranceFailure(f"Contact triangles on edge {edge} are not congruent")
        values.append(0.5 * (area_first + area_second))
    return NaturalParams(*values)


def ex_spheres(t: Tetrahedron) -> list:
    """
    The four ex-spheres, keyed by the vertex whose opposite face they touch from outside.
    Each entry also carries the residual of the ex-touch area hypothesis.
    """
    # imported here to avoid a cycle: natural_params depends on this module's geometry helpers
    from app.services.natural_params import inverse_from_areas, natural_from_areas

    _require_nondegenerate(t, "ex_spheres")
    f = facial_areas(t)
    s = f.s
    tv = float(volume_t(t))
    r = tv / s
    n = natural_from_areas(f)
    inverse = inverse_from_areas(f)
    weights = {"A": f.BCD, "B": f.ACD, "C": f.ABD, "D": f.ABC}
    sums = {"A": n.u + n.v + n.w, "B": n.u + n.x + n.y, "C": n.v + n.x + n.z, "D": n.w + n.y + n.z}
    opposite_face = {"A": "BCD", "B": "ACD", "C": "ABD", "D": "ABC"}
    normals = face_normals(t)

    spheres = []
    for vertex in "ABCD":
        total = s - 2 * weights[vertex]
        if abs(total) <= settings.DEGENERATE_VOLUME_TOL * s or sums[vertex] <= 0:
            logging.error(f"Ex-sphere opposite {vertex} undefined: weight sum {total}")
            raise ExSphereUndefined(f"Ex-sphere for vertex {vertex} is undefined")
        center = (0.0, 0.0, 0.0)
        for label, weight in weights.items():
            signed = -weight if label == vertex else weight
            center = add(center, scale(signed / total, _point(t, label)))
        radius = tv / total
        formula_radius = 0.5 * r * s / sums[vertex]

        for face, normal in normals.items():
            anchor = _point(t, FACE_VERTICES[face][0][0])
            distance = abs(dot(sub(center, anchor), normal))
            if abs(distance - radius) > 1e-8 * radius:
                logging.error(f"Ex-center {vertex} at distance {distance} from {face}, radius {radius}")
                raise ToleranceFailure(f"Ex-sphere {vertex} is not tangent to face {face}")

        face = opposite_face[vertex]
        touch = _foot_on_face(t, face, center, normals[face])
        residual = 0.0
        for edge in EDGES:
            if edge[0] not in face or edge[1] not in face:
                continue
            a, b = _point(t, edge[0]), _point(t, edge[1])
            predicted = radius / r * inverse[EDGES.index(edge)]
            actual = _doubled_triangle_area(a, b, touch)
            residual = max(residual, abs(predicted - actual) / max(s, 1e-300))
        if residual > 1e-8:
            logger.warning(f"Ex-touch hypothesis residual {residual:.3e} for vertex {vertex}")
        spheres.append(
            ExSphere(
                vertex=vertex,
                center=center,
                radius=radius,
                formula_radius=formula_radius,
                touch_point=touch,
                hypothesis_residual=residual,
            )
        )
    return spheres


def medial_octahedron(t: Tetrahedron) -> MedialOctahedron:
    mids = {edge: scale(0.5, add(_point(t, edge[0]), _point(t, edge[1]))) for edge in EDGES}
    U, V, W, X, Y, Z = (mids[edge] for edge in EDGES)
    axis = sub(Z, U)
    volume = 0.0
    # equatorial cycle around the diagonal UZ
    ring = (V, W, Y, X)
    for k in range(4):
        P, Q = ring[k], ring[(k + 1) % 4]
        volume += abs(float(dot(axis, cross(sub(P, U), sub(Q, U))))) / 6.0
    return MedialOctahedron(U=U, V=V, W=W, X=X, Y=Y, Z=Z, volume=volume)


def opposite_edge_dots(t: Tetrahedron) -> tuple:
    """(AB·CD, AC·BD, AD·BC)."""
    e = edge_vectors(t)
    return dot(e["AB"], e["CD"]), dot(e["AC"], e["BD"]), dot(e["AD"], e["BC"])


def is_orthocentric(t: Tetrahedron, tol: float = 1e-9) -> bool:
    scale_sq = max_edge_length(t) ** 2
    return all(abs(float(value)) <= tol * scale_sq for value in opposite_edge_dots(t))


def apply_affine(t: Tetrahedron, matrix, offset=(0, 0, 0)) -> Tetrahedron:
    def image(p):
        return tuple(sum(matrix[i][j] * p[j] for j in range(3)) + offset[i] for i in range(3))
    return Tetrahedron(*(image(p) for p in t))
