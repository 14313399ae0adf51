import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from app.core.exceptions import CoincidentPoints, DegenerateBase, InconsistentAreas, NotRank1
from app.models.models import Tetrahedron
from app.services import areal_identities, natural_params, planar, tetra_core
from tests.strategies import RIGHT_CORNER_N, SQUARE_N, rng_for, seeds

BASE = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))
SQUARE_2D = ((0, 0), (1, 0), (1, 1), (0, 1))
# one representative of each convex class with diagonals AB and CD
CONVEX_AB_CD = {4: (0.7, 0.7), 5: (1.5, 0.3), 6: (0.3, 1.5), 7: (1.5, 1.5)}


def _areas(points):
    return tetra_core.facial_areas(Tetrahedron(*((float(p[0]), float(p[1]), 0.0) for p in points)))


def _grid():
    values = [-3.0 + 0.37 * k + 0.011 for k in range(20)]
    for x in values:
        for y in values:
            alpha = (1 - x - y, x, y)
            if min(min(abs(a), abs(1 - a)) for a in alpha) > 1e-3:
                yield (x, y)


def test_class_table_covers_sixteen_classes():
    assert sorted(planar.CLASS_SIGNS) == list(range(16))
    assert len(set(planar.CLASS_SIGNS.values())) == 16
    for class_id in range(16):
        signs, sigma = planar.CLASS_SIGNS[class_id]
        # a negative barycentric coordinate always sits below one
        assert all(s_ == 1 for a, s_ in zip(signs, sigma) if a < 0)


def test_chirotope_cases():
    assert planar.chirotope_case((0.2, 0.3, 0.5)) == 0
    assert planar.chirotope_case((2, -0.5, -0.5)) == 1
    assert planar.chirotope_case((1, -1, 1)) == 5
    with pytest.raises(ValueError):
        planar.chirotope_case((-1, -1, -1))


def test_region_sweep_matches_area_classification():
    seen = set()
    for a in _grid():
        region = planar.region_class(a, BASE)
        assert len(region) == 1
        f = _areas((a,) + BASE)
        found = planar.classify_planar(natural_params.natural_from_areas(f))
        assert found.candidates == region
        seen.add(region[0])
    assert seen == set(range(16))


def test_region_boundary_lists_adjacent_classes():
    square = planar.region_class(SQUARE_2D[0], SQUARE_2D[1:])
    assert square == (8, 9, 10, 11)
    with pytest.raises(DegenerateBase):
        planar.region_class((0, 0), ((0, 0), (1, 1), (2, 2)))


def test_square_classification():
    found = planar.classify_planar(SQUARE_N)
    assert found.chirotope_case == 5
    assert found.signs == (1, -1, 1)
    assert found.candidates == (8, 9, 10, 11)
    assert found.class_id == 8
    for class_id in found.candidates:
        assert planar.exterior_from_interior(class_id, (0, 2, 0)) == (1, 1, 1, 1)


def test_classification_needs_rank_one():
    with pytest.raises(NotRank1):
        planar.classify_planar(RIGHT_CORNER_N)
    with pytest.raises(NotRank1):
        planar.classify_planar((0,) * 6)


def test_class_zero_signed_sums():
    assert planar.signed_sums(0) == ((1, 1, -1), (1, -1, 1), (-1, 1, 1), (1, 1, 1))
    c = Fraction(3)
    # equal interiors put A at the centroid: the three faces through A are a third of BCD
    assert planar.exterior_from_interior(0, (c, c, c)) == (c / 2, c / 2, c / 2, 3 * c / 2)


def test_interior_point_example():
    f = _areas(((0.2, 0.2),) + BASE)
    assert f == pytest.approx((0.2, 0.2, 0.6, 1.0, 0.4, 0.8, 0.8))
    n = natural_params.natural_from_areas(f)
    assert n[:3] == pytest.approx((0, 0, 0), abs=1e-12)
    found = planar.classify_planar(n)
    assert found.class_id == 0
    assert planar.exterior_from_interior(0, f.interior) == pytest.approx(f.exterior)
    assert planar.barycentric_from_areas(f, 0) == pytest.approx((0.6, 0.2, 0.2))


rational_alpha = st.tuples(
    st.fractions(min_value=-4, max_value=4, max_denominator=7),
    st.fractions(min_value=-4, max_value=4, max_denominator=7),
).map(lambda pair: (1 - pair[0] - pair[1],) + pair)


@given(rational_alpha, st.fractions(min_value=Fraction(1, 5), max_value=5, max_denominator=9))
def test_exterior_from_interior_is_exact(alpha, base):
    if any(a == 0 or a == 1 for a in alpha):
        return
    signs = tuple(1 if a > 0 else -1 for a in alpha)
    sigma = tuple(1 if a < 1 else -1 for a in alpha)
    class_id = planar._CLASS_BY_SIGNS[(signs, sigma)]
    a_B, a_C, a_D = alpha
    exterior = (abs(a_D) * base, abs(a_C) * base, abs(a_B) * base, base)
    interior = tuple(abs(1 - a) * base for a in alpha)
    assert planar.exterior_from_interior(class_id, interior) == exterior


def test_exterior_from_interior_rejects_wrong_class():
    with pytest.raises(InconsistentAreas):
        planar.exterior_from_interior(0, (1, 1, 5))


def test_square_allowable_sequence():
    sequence = planar.allowable_sequence(SQUARE_2D)
    assert len(sequence) == 8
    half = len(sequence) // 2
    for k in range(half):
        assert sequence[k + half] == sequence[k][::-1]


def test_convex_classes_have_distinct_sequences():
    sequences = {planar.allowable_sequence((a,) + BASE) for a in CONVEX_AB_CD.values()}
    assert len(sequences) == 4
    for a in CONVEX_AB_CD.values():
        assert len(planar.allowable_sequence((a,) + BASE)) == 12


def test_allowable_sequence_is_canonical():
    points = ((0.7, 0.7),) + BASE
    shifted = tuple((x + 3.0, y - 1.0) for x, y in points)
    assert planar.allowable_sequence(points) == planar.allowable_sequence(shifted)
    mirrored = tuple((-x, y) for x, y in points)
    assert planar.allowable_sequence(points) == planar.allowable_sequence(mirrored)


def test_collinear_sweep_has_two_orders():
    sequence = planar.allowable_sequence(((0, 0), (1, 1), (3, 3), (-2, -2)))
    assert len(sequence) == 2
    assert set(sequence) == {"DABC", "CBAD"}


def test_allowable_sequence_rejects_coincident_points():
    with pytest.raises(CoincidentPoints):
        planar.allowable_sequence(((0, 0), (1, 0), (1, 0), (0, 1)))


def test_centroid_canonical_is_equilateral():
    f = _areas(((1 / 3, 1 / 3),) + BASE)
    config = planar.canonical_planar(f.squared())
    assert config.rho == pytest.approx((1 / 12,) * 3)
    base = config.d_star[3:]
    assert base == pytest.approx((base[0],) * 3)
    assert config.d_star[:3] == pytest.approx((base[0] / 3,) * 3)
    assert planar.gradient_residual(config) <= 1e-12


def _special_linear(rng):
    def rotation(theta):
        return np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])

    k = rng.uniform(0.5, 2.0)
    return rotation(rng.uniform(0, 2 * math.pi)) @ np.diag([k, 1 / k]) @ rotation(rng.uniform(0, 2 * math.pi))


def _random_planar(seed):
    rng = rng_for(seed)
    while True:
        points = rng.uniform(-1.0, 1.0, size=(4, 2))
        points = tuple(tuple(float(c) for c in p) for p in points)
        # every face area bounded away from zero keeps each relabelling off the class boundaries
        if min(_areas(points)) > 0.1:
            return rng, points


random_planar = seeds.map(_random_planar)


@hyp_settings(max_examples=40)
@given(random_planar)
def test_canonical_planar_minimizes_gyration(sample):
    rng, points = sample
    f = _areas(points)
    config = planar.canonical_planar(f.squared())
    assert config.residual <= 1e-7
    assert planar.gradient_residual(config) <= 1e-8
    assert areal_identities.cm_determinants(config.d_star).four_point == pytest.approx(0, abs=1e-8 * f.s ** 3)
    canonical = _areas(config.coordinates)
    assert canonical == pytest.approx(f, abs=1e-7 * f.s)

    total = sum(config.d_star)
    assert config.gyration == pytest.approx(total / 16)
    assert total <= sum(tetra_core.squared_distances(Tetrahedron(*((x, y, 0.0) for x, y in points)))) * (1 + 1e-9)
    coordinates = np.array(config.coordinates)
    for _ in range(25):
        moved = coordinates @ _special_linear(rng).T
        moved_total = sum(
            float(np.sum((moved[i] - moved[j]) ** 2)) for i in range(4) for j in range(i + 1, 4)
        )
        assert moved_total >= total * (1 - 1e-9)


@hyp_settings(max_examples=20)
@given(random_planar)
def test_canonical_planar_ignores_choice_of_apex(sample):
    _, points = sample
    reference = planar.canonical_planar(_areas(points).squared()).d_star
    edges = ("AB", "AC", "AD", "BC", "BD", "CD")
    for shift in range(1, 4):
        order = tuple((k + shift) % 4 for k in range(4))
        relabelled = tuple(points[k] for k in order)
        d_star = planar.canonical_planar(_areas(relabelled).squared()).d_star
        names = "ABCD"
        for edge, value in zip(edges, d_star):
            i, j = (order[names.index(label)] for label in edge)
            original = names[min(i, j)] + names[max(i, j)]
            assert value == pytest.approx(reference[edges.index(original)], rel=1e-6)
