from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, NamedTuple, Optional, Union

import numpy as np

# Every polynomial routine is generic over the scalar so exact rationals flow through unchanged.
Scalar = Union[float, int, Fraction]
Vec = tuple

EDGES = ("AB", "AC", "AD", "BC", "BD", "CD")
FACES = ("ABC", "ABD", "ACD", "BCD", "AB|CD", "AC|BD", "AD|BC")
NATURAL_KEYS = ("u", "v", "w", "x", "y", "z")
VERTICES = ("A", "B", "C", "D")

# edge -> (first exterior face, second exterior face, interior face) as indices into FacialAreas
EDGE_FACES = {
    "AB": (0, 1, 4),
    "AC": (0, 2, 5),
    "AD": (1, 2, 6),
    "BC": (0, 3, 6),
    "BD": (1, 3, 5),
    "CD": (2, 3, 4),
}

# edge -> the opposite edge
OPPOSITE = {"AB": "CD", "AC": "BD", "AD": "BC", "BC": "AD", "BD": "AC", "CD": "AB"}


class Tetrahedron(NamedTuple):
    A: Vec
    B: Vec
    C: Vec
    D: Vec


class SquaredDistances(NamedTuple):
    AB: Scalar
    AC: Scalar
    AD: Scalar
    BC: Scalar
    BD: Scalar
    CD: Scalar

    def edge(self, name: str) -> Scalar:
        return self[EDGES.index(name)]


class FacialAreas(NamedTuple):
    """Doubled exterior and quadrupled interior face areas in canonical order."""
    ABC: Scalar
    ABD: Scalar
    ACD: Scalar
    BCD: Scalar
    AB_CD: Scalar
    AC_BD: Scalar
    AD_BC: Scalar

    @property
    def exterior(self) -> tuple:
        return tuple(self[:4])

    @property
    def interior(self) -> tuple:
        return tuple(self[4:])

    @property
    def s(self) -> Scalar:
        return self[0] + self[1] + self[2] + self[3]

    def squared(self) -> tuple:
        return tuple(value * value for value in self)


class NaturalParams(NamedTuple):
    u: Scalar
    v: Scalar
    w: Scalar
    x: Scalar
    y: Scalar
    z: Scalar

    @property
    def s(self) -> Scalar:
        return 2 * (self.u + self.v + self.w + self.x + self.y + self.z)


class InverseParams(NamedTuple):
    u: Scalar
    v: Scalar
    w: Scalar
    x: Scalar
    y: Scalar
    z: Scalar


class PluckerVector(NamedTuple):
    AB: Scalar
    AC: Scalar
    AD: Scalar
    BC: Scalar
    BD: Scalar
    CD: Scalar


class Tau(NamedTuple):
    t0: Scalar
    t1: Scalar
    t2: Scalar
    t3: Scalar


class TauTable(NamedTuple):
    AB: Tau
    AC: Tau
    AD: Tau
    BC: Tau
    BD: Tau
    CD: Tau

    def minimum(self) -> Scalar:
        return min(min(tau.t1, tau.t2, tau.t3) for tau in self)


class MNPair(NamedTuple):
    m: tuple  # (m_A, m_B, m_C, m_D)
    n: tuple
    degenerate_n: bool = False


@dataclass(frozen=True)
class ArealGram:
    G_A: Any
    G_B: Any
    G_C: Any
    G_D: Any
    G_ext: Any
    G_int: Any
    gramian: Scalar
    vertex_gramians: tuple
    xi: Scalar


@dataclass(frozen=True)
class InTouchData:
    in_center: tuple
    in_radius: float
    J: tuple  # in BCD
    K: tuple  # in ACD
    L: tuple  # in ABD
    N: tuple  # in ABC


@dataclass(frozen=True)
class ExSphere:
    vertex: str
    center: tuple
    radius: float
    formula_radius: float
    touch_point: tuple
    hypothesis_residual: float


@dataclass(frozen=True)
class MedialOctahedron:
    U: tuple  # mid AB
    V: tuple  # mid AC
    W: tuple  # mid AD
    X: tuple  # mid BC
    Y: tuple  # mid BD
    Z: tuple  # mid CD
    volume: float


@dataclass(frozen=True)
class ReconstructionResult:
    vertices: Tetrahedron
    achieved_f: FacialAreas
    residual: float
    chirality: int


@dataclass(frozen=True)
class AreaMapWitness:
    d_star: SquaredDistances
    branch: str
    delta_star: float
    residual: float


@dataclass(frozen=True)
class LatticeNode:
    rank: Optional[int]
    vanishing_complementary: frozenset
    partition: tuple = ()
    level: Optional[int] = None
    consistent: bool = True
    nondegenerate: bool = False


@dataclass(frozen=True)
class PlanarClass:
    class_id: int
    chirotope_case: int
    signs: tuple  # signs of (alpha_B, alpha_C, alpha_D)
    signed_sums: tuple  # per exterior face: coefficients of the three interior areas
    candidates: tuple = ()


@dataclass(frozen=True)
class CanonicalPlanarConfig:
    d_star: SquaredDistances
    coordinates: tuple  # four 2-D points
    gyration: float
    rho: tuple  # (rho_BC, rho_BD, rho_CD)
    residual: float


@dataclass(frozen=True)
class ABGDParams:
    alpha: float
    beta: float
    gamma: float
    delta: float
    varsigma: Optional[float] = None
    sign_pattern: Optional[int] = None


@dataclass
class InvolutionReport:
    operation: str
    input: Any
    output: Any
    residuals: dict = field(default_factory=dict)
    orbit: dict = field(default_factory=dict)


def as_array(matrix) -> np.ndarray:
    return np.array([[float(entry) for entry in row] for row in matrix], dtype=float)


class AreaValidity(str, Enum):
    non_degenerate_3d = "NonDegenerate3D"
    rank2_degenerate = "Rank2Degenerate"
    rank1_planar = "Rank1Planar"
    invalid = "Invalid"


@dataclass(frozen=True)
class ValidityReport:
    validity: AreaValidity
    xi: float
    min_tau: float
    gramian: float
    rank: int
    eigenvalues: tuple
    reason: str = ""


@dataclass(frozen=True)
class CMDeterminants:
    """Normalized distance determinants: each equals the squared quantity it measures."""
    three_point: tuple  # F_ABC, F_ABD, F_ACD, F_BCD
    talata: tuple  # F_AB|CD, F_AC|BD, F_AD|BC
    four_point: Scalar  # t²
    two_point: tuple  # AB·CD, AC·BD, AD·BC, AB·AC, AB·AD, AC·AD


@dataclass(frozen=True)
class IdentityReport:
    residuals: dict  # identity name -> raw residuals (exact for rational input)
    relative: dict  # identity name -> max residual normalized by the identity's scale
    max_relative: float


@dataclass(frozen=True)
class SimplexReport:
    dim: int
    naturals: dict  # (i, j) -> (n−1)!·hyper-area of the contact simplex on the facet pair omitting i, j
    lhs: float
    rhs: float
    residual: float
    pair_residual: float


@dataclass(frozen=True)
class CollinearQuadruple:
    positions: tuple  # signed positions of A, B, C, D on a line
    case: int  # index k of the vanishing factor Omega_k
    residuals: dict  # edge -> squared gap minus complementary product
    max_residual: float
    consistent: bool


@dataclass(frozen=True)
class SignedPositions:
    cross: dict  # edge -> planar cross product of the two areal vectors labelled by its vertices
    pq_residual: dict  # edge -> cross − 2·p·q
    triple_sums: dict  # vertex -> sum of the three cross products sharing it


@dataclass(frozen=True)
class CubicPsi:
    coefficients: tuple  # (a, b, c, d) of a·u³ + b·u² + c·u + d
    roots: tuple  # real roots, ascending
    discriminant: float
    clustered: bool = False


@dataclass(frozen=True)
class TwoToTwoSolution:
    solutions: tuple  # NaturalParams with all six entries positive
    roots: tuple
    residuals: tuple  # per solution: max of the scaled Omega, s and abgd residuals
    pairing_residual: Optional[float] = None


@dataclass
class ExperimentReport:
    name: str
    trials: int
    passed: int = 0
    failed: int = 0
    worst_residual: float = 0.0
    failures: list = field(default_factory=list)  # {"trial", "reason", "residual"}
    details: dict = field(default_factory=dict)
