import math
from fractions import Fraction

import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from app.core.exceptions import DegenerateInput, NotDegenerate, WrongRank
from app.models.models import AreaValidity, FacialAreas, MNPair, NaturalParams
from app.services import areal_identities, degeneracy, natural_params, tetra_core
from tests.strategies import (
    RIGHT_CORNER,
    RIGHT_CORNER_F,
    RIGHT_CORNER_N,
    SQUARE,
    SQUARE_F,
    SQUARE_N,
    random_tetrahedron,
    rng_for,
    seeds,
)

SQUEEZED_CORNER = FacialAreas(0.0, 1.0, 1.0, math.sqrt(2), 1.0, 1.0, math.sqrt(2))
THREE_VANISH = NaturalParams(1, 1, 1, 0, 0, 0)
OPPOSITE_THREE_VANISH = NaturalParams(0, 0, 0, 1, 1, 1)


def _squeezed(seed):
    rng = rng_for(seed)
    t = random_tetrahedron(rng, min_t=0.2)
    axis = tuple(float(c) for c in rng.normal(size=3))
    return t, axis, degeneracy.squeeze_limit(t, axis)


squeezed = seeds.map(_squeezed)
small_rationals = st.fractions(min_value=-5, max_value=5, max_denominator=9)
rational_mn = st.builds(
    MNPair,
    st.tuples(*([small_rationals] * 4)),
    st.tuples(*([small_rationals] * 4)),
)


def test_squeeze_right_corner_along_z():
    f = degeneracy.squeeze_limit(RIGHT_CORNER)
    assert f == pytest.approx(SQUEEZED_CORNER)
    assert areal_identities.areal_gram(f).gramian == pytest.approx(0, abs=1e-12)
    report = areal_identities.euclidean_area_validity(f)
    assert report.validity == AreaValidity.rank2_degenerate
    assert degeneracy.rank_and_lattice(f).rank == 2


def test_squeeze_finite_approaches_limit():
    for axis in ((0, 0, 1), (1, 2, 3)):
        limit = degeneracy.squeeze_limit(RIGHT_CORNER, axis)
        finite = tetra_core.facial_areas(degeneracy.squeeze_finite(RIGHT_CORNER, 1e3, axis))
        for a, b in zip(finite, limit):
            assert abs(a - b) <= 1e-5 * max(limit)


def test_squeeze_rejects_bad_input():
    with pytest.raises(DegenerateInput):
        degeneracy.squeeze_limit(SQUARE)
    with pytest.raises(DegenerateInput):
        degeneracy.squeeze_limit(RIGHT_CORNER, (0, 0, 0))
    with pytest.raises(DegenerateInput):
        degeneracy.squeeze_finite(RIGHT_CORNER, 0.0)


@given(squeezed)
def test_squeeze_limit_is_a_zero_of_omega(sample):
    _, _, f = sample
    s = f.s
    assert abs(areal_identities.yetter_xi(f)) <= 1e-9 * s * s
    n = natural_params.natural_from_areas(f)
    assert abs(natural_params.omega(n)) <= 1e-9 * s ** 4
    node = degeneracy.rank_and_lattice(f)
    assert not node.nondegenerate
    assert node.rank <= 2


def test_lattice_three_non_opposite_vanish():
    node = degeneracy.rank_and_lattice(THREE_VANISH)
    assert node.rank == 2
    assert node.vanishing_complementary == {"x", "y", "z"}
    assert node.partition == ("A", "BCD")
    assert node.level == 2
    assert node.consistent


def test_lattice_rank_one_examples():
    for n in (OPPOSITE_THREE_VANISH, SQUARE_N):
        node = degeneracy.rank_and_lattice(n)
        assert node.rank == 1
        assert len(node.vanishing_complementary) == 6
        assert node.partition == ("ABCD",)
        assert node.level == 3
        assert node.consistent


def test_lattice_nondegenerate_marker():
    node = degeneracy.rank_and_lattice(RIGHT_CORNER_N)
    assert node.nondegenerate
    assert node.rank == 3
    assert degeneracy.rank_and_lattice(RIGHT_CORNER_F).nondegenerate


@given(squeezed)
def test_lattice_generic_zero_has_distinct_points(sample):
    node = degeneracy.rank_and_lattice(sample[2])
    assert node.consistent
    if not node.vanishing_complementary:
        assert node.level == 0
        assert len(node.partition) == 4


def test_mn_on_planar_square():
    mn = degeneracy.mn_from_degenerate(SQUARE_F)
    assert mn.degenerate_n
    p = degeneracy.plucker_from_mn(mn)
    assert degeneracy.natural_from_plucker(p, 4) == pytest.approx(SQUARE_N, abs=1e-12)
    assert [math.sqrt(value) for value in degeneracy.interior_from_mn(mn)] == pytest.approx([0, 2, 0], abs=1e-6)


def test_mn_requires_rank_one_or_two():
    with pytest.raises(WrongRank):
        degeneracy.mn_from_degenerate(RIGHT_CORNER_F)
    with pytest.raises(WrongRank):
        degeneracy.mn_from_degenerate((0,) * 7)


@given(squeezed)
def test_mn_reproduces_areas_and_naturals(sample):
    _, _, f = sample
    s = f.s
    mn = degeneracy.mn_from_degenerate(f)
    assert abs(sum(a * b for a, b in zip(mn.m, mn.n))) <= 1e-9 * s
    exterior = [m * m + n * n for m, n in zip(mn.m, mn.n)]
    # m_A² + n_A² = f_BCD, ..., m_D² + n_D² = f_ABC
    assert exterior == pytest.approx(list(reversed(f.exterior)), abs=1e-9 * s)
    for value, expected in zip(degeneracy.interior_from_mn(mn), f.squared()[4:]):
        assert abs(value - expected) <= 1e-8 * s * s

    p = degeneracy.plucker_from_mn(mn)
    assert abs(degeneracy.plucker_identity(p)) <= 1e-9 * s * s
    assert sum(value * value for value in p) == pytest.approx(s * s / 4, rel=1e-9)
    n = natural_params.natural_from_areas(f)
    for a, b in zip(degeneracy.natural_from_plucker(p, s), n):
        assert abs(a - b) <= 1e-8 * s
    inverse = natural_params.inverse_from_natural(n)
    for a, b in zip(degeneracy.inverse_from_plucker(degeneracy.q_from_mn(mn), s), inverse):
        assert abs(a - b) <= 1e-8 * s


@given(rational_mn)
def test_wedge_norm_is_lagrange_identity(mn):
    p = degeneracy.plucker_from_mn(mn)
    m_sq = sum(value * value for value in mn.m)
    n_sq = sum(value * value for value in mn.n)
    dot = sum(a * b for a, b in zip(mn.m, mn.n))
    assert sum(value * value for value in p) == m_sq * n_sq - dot * dot
    assert degeneracy.plucker_identity(p) == 0


@given(rational_mn)
def test_cross_products_are_twice_pq(mn):
    report = degeneracy.signed_positions(mn)
    assert all(value == 0 for value in report.pq_residual.values())


@given(squeezed)
def test_signed_positions_triple_sums_vanish(sample):
    f = sample[2]
    report = degeneracy.signed_positions(degeneracy.mn_from_degenerate(f))
    for value in report.triple_sums.values():
        assert abs(value) <= 1e-8 * f.s ** 2


def test_plucker_from_square_naturals():
    p = degeneracy.plucker_from_natural(SQUARE_N)
    assert p == pytest.approx((1, 0, 1, 1, 0, -1))
    assert degeneracy.plucker_identity(p) == pytest.approx(0, abs=1e-12)


def test_plucker_from_three_vanishing():
    p = degeneracy.plucker_from_natural(THREE_VANISH)
    root3 = math.sqrt(3)
    assert p[:3] == (0, 0, 0)
    assert [abs(value) for value in p[3:]] == pytest.approx([root3] * 3)
    assert degeneracy.natural_from_plucker(p, 6) == pytest.approx(THREE_VANISH)


def test_plucker_rejects_nondegenerate():
    with pytest.raises(NotDegenerate):
        degeneracy.plucker_from_natural(RIGHT_CORNER_N)


@given(squeezed)
def test_klein_round_trip(sample):
    f = sample[2]
    n = natural_params.natural_from_areas(f)
    p = degeneracy.plucker_from_natural(n)
    assert abs(degeneracy.plucker_identity(p)) <= 1e-8 * f.s ** 2
    for a, b in zip(degeneracy.natural_from_plucker(p, n.s), n):
        assert abs(a - b) <= 1e-9 * f.s


def test_orbit_sizes():
    generic = (1, 1, 1, 1, 2, 1)
    assert degeneracy.plucker_identity(generic) == 0
    orbit = degeneracy.z24_orbit(generic)
    assert len(orbit) == 16
    assert all(tuple(-value for value in member) in orbit for member in orbit)
    assert all(degeneracy.plucker_identity(member) == 0 for member in orbit)
    assert {degeneracy.natural_from_plucker(member, Fraction(7)) for member in orbit} == {
        degeneracy.natural_from_plucker(generic, Fraction(7))
    }

    root3 = math.sqrt(3)
    assert len(degeneracy.z24_orbit((0, 0, 0, root3, -root3, -root3))) == 8
    assert degeneracy.z24_orbit((0,) * 6) == {(0,) * 6}


def test_orbit_flips_opposite_products_together():
    p = (1, 2, 3, 4, 5, 6)
    signs = (1, 1, 1)
    for member in degeneracy.z24_orbit(p):
        products = (member[0] * member[5], member[1] * member[4], member[2] * member[3])
        original = (p[0] * p[5], p[1] * p[4], p[2] * p[3])
        ratio = tuple(a // b for a, b in zip(products, original))
        assert ratio in (signs, tuple(-value for value in signs))


def test_collinear_three_vanishing():
    quadruple = degeneracy.collinear_quadruple(THREE_VANISH)
    assert quadruple.positions == pytest.approx((1 / math.sqrt(3), 0, 0, 0))
    assert quadruple.consistent
    assert quadruple.max_residual <= 1e-12


def test_collinear_planar_square_collapses():
    quadruple = degeneracy.collinear_quadruple(SQUARE_N)
    assert quadruple.positions == pytest.approx((0, 0, 0, 0))
    assert quadruple.consistent


def test_collinear_rejects_nondegenerate():
    with pytest.raises(NotDegenerate):
        degeneracy.collinear_quadruple(RIGHT_CORNER_N)


@hyp_settings(max_examples=50)
@given(squeezed)
def test_collinear_gaps_are_complementary_products(sample):
    f = sample[2]
    quadruple = degeneracy.collinear_quadruple(natural_params.natural_from_areas(f))
    assert quadruple.consistent
    assert quadruple.max_residual <= 1e-8 * f.s ** 2
