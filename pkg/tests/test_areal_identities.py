import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.models.models import EDGES, AreaValidity, FacialAreas
from app.services import areal_identities, linalg, tetra_core
from tests.strategies import (
    NON_EUCLIDEAN_F,
    RIGHT_CORNER,
    RIGHT_CORNER_F,
    SQUARE_F,
    float_tetrahedra,
    positive_rationals,
    rational_areas,
    rational_tetrahedra,
)


def test_tau_table_square():
    table = areal_identities.tau_table(SQUARE_F)
    # AB: faces ABC, ABD with interior AB|CD = 0
    assert table.AB == (2, 2, 0, 0)
    assert table.AC == (4, 0, 2, 2)
    assert table.minimum() == 0
    assert areal_identities.tau_table(RIGHT_CORNER_F).minimum() > 0


def test_yetter_xi_fixtures():
    assert areal_identities.yetter_xi(SQUARE_F) == 0
    assert areal_identities.yetter_xi(RIGHT_CORNER_F) == pytest.approx(0, abs=1e-12)
    assert areal_identities.yetter_xi((1, 1, 1, 1, 1, 1, 1)) == 1


def test_right_corner_grams():
    gram = areal_identities.areal_gram(RIGHT_CORNER_F)
    assert gram.gramian == pytest.approx(1)
    assert [[round(value, 12) for value in row] for row in gram.G_int] == [[2, -1, 1], [-1, 2, -1], [1, -1, 2]]
    assert linalg.det3(gram.G_int) == pytest.approx(4)
    assert areal_identities.interior_gram_check(RIGHT_CORNER_F) <= 1e-12


def test_non_euclidean_gramian():
    F = NON_EUCLIDEAN_F.squared()
    G_A = areal_identities.vertex_gram(F, "A")
    assert [[round(value, 9) for value in row] for row in G_A] == [[81, 40, -147], [40, 100, -30], [-147, -30, 289]]
    assert linalg.det3(G_A) == pytest.approx(-2500)
    report = areal_identities.euclidean_area_validity(NON_EUCLIDEAN_F)
    assert report.validity == AreaValidity.invalid


def test_vertex_grams_are_principal_submatrices():
    F = SQUARE_F.squared()
    G = areal_identities.exterior_gram(F)
    assert areal_identities.vertex_gram(F, "D") == [[G[i][j] for j in (1, 2, 3)] for i in (1, 2, 3)]


@given(rational_tetrahedra)
def test_vertex_gramians_agree_on_tetrahedra(t):
    F = tetra_core.squared_facial_areas(t)
    gram = areal_identities.areal_gram_from_squared(F)
    assert gram.xi == 0
    assert len(set(gram.vertex_gramians)) == 1
    assert gram.gramian == tetra_core.triple_product(t) ** 4
    assert linalg.det3(gram.G_int) == 4 * gram.gramian


@given(rational_tetrahedra)
def test_gramian_difference_is_multiple_of_xi(t):
    F = tetra_core.squared_facial_areas(t)
    difference, closed_form = areal_identities.gramian_difference(F)
    assert difference == closed_form == 0


@given(st.tuples(*([positive_rationals] * 7)))
def test_gramian_difference_closed_form_off_the_variety(F):
    difference, closed_form = areal_identities.gramian_difference(F)
    assert difference == closed_form


def test_gramian_difference_small_example():
    assert areal_identities.gramian_difference((1, 1, 1, 0, 0, 0, 0)) == (3, 3)


@given(rational_areas)
def test_minor_factorization_exact(f):
    for residual in areal_identities.minor_factorization_check(f).values():
        assert residual == 0


@given(rational_areas)
def test_areal_cosine_is_quarter_tau_difference(f):
    table = areal_identities.tau_table(f)
    for edge in EDGES:
        tau = getattr(table, edge)
        expected = (tau.t0 * tau.t1 - tau.t2 * tau.t3) * Fraction(1, 4)
        assert areal_identities.areal_cosine(f, edge) == expected


def test_cm_determinants_conventions():
    dets = areal_identities.cm_determinants((12, 12, 4, 12, 4, 3))
    assert dets.four_point == -39
    assert dets.three_point[0] == 108
    corner = areal_identities.cm_determinants(tetra_core.squared_distances(RIGHT_CORNER))
    assert corner.three_point == (1, 1, 1, 3)
    assert corner.talata == (2, 2, 2)
    assert corner.four_point == 1


@given(rational_tetrahedra)
def test_cm_determinants_exact_on_rationals(t):
    dets = areal_identities.cm_determinants(tetra_core.squared_distances(t))
    assert dets.three_point + dets.talata == tetra_core.squared_facial_areas(t)
    assert dets.four_point == tetra_core.triple_product(t) ** 2


def test_validity_fixtures():
    assert areal_identities.euclidean_area_validity(RIGHT_CORNER_F).validity == AreaValidity.non_degenerate_3d
    square = areal_identities.euclidean_area_validity(SQUARE_F)
    assert square.validity == AreaValidity.rank1_planar
    assert square.rank == 1
    assert areal_identities.euclidean_area_validity((0,) * 7).validity == AreaValidity.invalid
    broken = areal_identities.euclidean_area_validity((1, 1, 1, 1, 1, 1, 1))
    assert broken.validity == AreaValidity.invalid
    assert "Yetter" in broken.reason
    negative = areal_identities.euclidean_area_validity((-1, 1, 1, 1, 1, 1, 0))
    assert negative.validity == AreaValidity.invalid


def test_validity_flags_tetrahedron_inequality():
    # Yetter holds but |AC|BD| exceeds |ABC| + |ACD|
    f = FacialAreas(1, 1, 1, 3, math.sqrt(3), 3, 0)
    report = areal_identities.euclidean_area_validity(f)
    assert report.validity == AreaValidity.invalid


@given(float_tetrahedra)
def test_validity_of_random_tetrahedra(t):
    report = areal_identities.euclidean_area_validity(tetra_core.facial_areas(t))
    assert report.validity == AreaValidity.non_degenerate_3d
    assert report.rank == 3
