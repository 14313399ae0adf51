import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.core.exceptions import DegenerateTetrahedron, NotDegenerate
from app.models.models import AreaValidity, FacialAreas, NaturalParams, Tetrahedron
from app.services import (
    areal_identities,
    degeneracy,
    involutions,
    natural_params,
    reconstruction,
    tetra_core,
)
from tests.strategies import (
    REGULAR,
    RIGHT_CORNER,
    RIGHT_CORNER_F,
    RIGHT_CORNER_N,
    SQUARE_F,
    SQUARE_N,
    float_tetrahedra,
    positive_rationals,
    random_tetrahedron,
    rational_areas,
    rng_for,
)

DISPHENOID = Tetrahedron((1.0, 2.0, 3.0), (1.0, -2.0, -3.0), (-1.0, 2.0, -3.0), (-1.0, -2.0, 3.0))
rational_naturals = st.builds(NaturalParams, *([positive_rationals] * 6))


def _planar(a):
    return tetra_core.facial_areas(Tetrahedron((a[0], a[1], 0.0), (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)))


def _squeezed(seed):
    rng = rng_for(seed)
    t = random_tetrahedron(rng, min_t=0.2)
    return degeneracy.squeeze_limit(t, tuple(float(c) for c in rng.normal(size=3)))


@given(rational_naturals)
def test_twin_is_an_exact_involution(n):
    assert involutions.twin(involutions.twin(n)) == n
    assert involutions.twin(n).s == n.s


@given(rational_areas)
def test_twin_areas_is_an_exact_involution(f):
    assert involutions.twin_areas(involutions.twin_areas(f)) == f


def test_equifacial_naturals_are_fixed():
    n = NaturalParams(1, 2, 3, 3, 2, 1)
    assert involutions.twin(n) == n
    assert involutions.twin(SQUARE_N) == SQUARE_N


def test_twin_of_right_corner():
    u, x = RIGHT_CORNER_N.u, RIGHT_CORNER_N.x
    assert involutions.twin(RIGHT_CORNER_N) == (x, x, x, u, u, u)
    twin_f = involutions.twin_areas(RIGHT_CORNER_F)
    root3 = math.sqrt(3)
    assert twin_f.exterior == pytest.approx(((1 + root3) / 2,) * 3 + ((3 - root3) / 2,))
    assert twin_f.interior == RIGHT_CORNER_F.interior
    assert twin_f == pytest.approx(natural_params.areas_from_natural(involutions.twin(RIGHT_CORNER_N)))


@given(float_tetrahedra)
def test_twin_preserves_areal_quantities(t):
    f = tetra_core.facial_areas(t)
    n = natural_params.natural_from_areas(f)
    image = involutions.twin(n)
    twin_f = natural_params.areas_from_natural(image)
    assert twin_f == pytest.approx(involutions.twin_areas(f), rel=1e-9, abs=1e-12 * f.s)
    assert twin_f.interior == pytest.approx(f.interior, rel=1e-9)
    assert twin_f.s == pytest.approx(f.s, rel=1e-12)
    assert natural_params.omega(image) == pytest.approx(natural_params.omega(n), rel=1e-9)
    assert natural_params.r_squared(image) == pytest.approx(natural_params.r_squared(n), rel=1e-9)
    assert natural_params.inverse_from_natural(image) == pytest.approx(natural_params.inverse_from_natural(n), rel=1e-9)


@given(float_tetrahedra)
def test_twin_distances_keep_opposite_products_and_dots(t):
    n = natural_params.natural_from_areas(tetra_core.facial_areas(t))
    d = tetra_core.squared_distances(t)
    twin_d = involutions.twin_distances(n)
    assert twin_d == pytest.approx(natural_params.distances_from_natural(involutions.twin(n)), rel=1e-8)
    for first, second in ((0, 5), (1, 4), (2, 3)):
        assert twin_d[first] * twin_d[second] == pytest.approx(d[first] * d[second], rel=1e-8)
    twin_t = reconstruction.coords_from_distances(twin_d)
    scale = max(d)
    for a, b in zip(tetra_core.opposite_edge_dots(twin_t), tetra_core.opposite_edge_dots(t)):
        assert abs(a - b) <= 1e-7 * scale


def test_twin_of_orthocentric_is_orthocentric():
    assert tetra_core.is_orthocentric(RIGHT_CORNER)
    n = natural_params.natural_from_areas(RIGHT_CORNER_F)
    twin_t = reconstruction.coords_from_distances(involutions.twin_distances(n))
    assert tetra_core.is_orthocentric(twin_t, tol=1e-8)


def test_twin_changes_rank_of_interior_point_configurations():
    n = natural_params.natural_from_areas(_planar((0.2, 0.2)))
    assert degeneracy.rank_and_lattice(n).rank == 1
    assert degeneracy.rank_and_lattice(involutions.twin(n)).rank == 2


def test_twin_keeps_convex_configurations_planar():
    n = natural_params.natural_from_areas(_planar((1.5, 0.3)))
    assert degeneracy.rank_and_lattice(involutions.twin(n)).rank == 1


def test_fiedler_inverse_of_regular():
    inverse = involutions.fiedler_inverse(REGULAR)
    assert tetra_core.volume_t(inverse) == pytest.approx(4 * math.sqrt(2), rel=1e-9)


@given(float_tetrahedra)
def test_fiedler_inverse_is_an_involution(t):
    twice = involutions.fiedler_inverse(involutions.fiedler_inverse(t))
    assert tetra_core.squared_distances(twice) == pytest.approx(tetra_core.squared_distances(t), rel=1e-7)
    residuals = involutions.fiedler_gram_check(t)
    for name, value in residuals.items():
        assert value <= 1e-7, name


def test_fiedler_inverse_keeps_equifacial():
    inverse = involutions.fiedler_inverse(DISPHENOID)
    exterior = tetra_core.facial_areas(inverse).exterior
    assert exterior == pytest.approx((exterior[0],) * 4, rel=1e-9)


def test_fiedler_inverse_rejects_flat_input():
    with pytest.raises(DegenerateTetrahedron):
        involutions.fiedler_inverse(Tetrahedron((0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)))


def test_reciprocal_of_square():
    image = involutions.reciprocal(SQUARE_F)
    assert image == pytest.approx((0.25, 0.25, 0.25, 0.25, 0.0, 0.5, 0.0), abs=1e-12)
    assert areal_identities.euclidean_area_validity(image).validity == AreaValidity.rank1_planar


def test_reciprocal_preserves_rank_two():
    for seed in range(10):
        f = _squeezed(seed)
        image = involutions.reciprocal(f)
        assert areal_identities.euclidean_area_validity(image).validity == AreaValidity.rank2_degenerate
        check = involutions.reciprocal_check(f)
        assert check["gram"] <= 1e-8
        assert check["double"] <= 1e-6
        assert check["scale"] == pytest.approx(1.0, rel=1e-6)


def test_reciprocal_needs_degenerate_areas():
    with pytest.raises(NotDegenerate):
        involutions.reciprocal(RIGHT_CORNER_F)


def test_square_orbit_closes_after_two_steps():
    report = involutions.involution_orbit(SQUARE_F, max_iter=10)
    assert report.residuals["commute"] <= 1e-12
    for orbit in report.orbit.values():
        assert orbit["status"] == "cycle"
        assert orbit["length"] == 2


def test_twin_and_reciprocal_do_not_commute():
    residuals = [involutions.involution_orbit(_squeezed(seed), max_iter=3).residuals["commute"] for seed in range(5)]
    assert max(residuals) > 1e-6


def test_run_involution_dispatch():
    report = involutions.run_involution("twin", RIGHT_CORNER_N)
    assert report.output == involutions.twin(RIGHT_CORNER_N)
    assert report.residuals["involution"] == 0
    assert involutions.run_involution("reciprocal", SQUARE_F).output == pytest.approx(
        (0.25, 0.25, 0.25, 0.25, 0.0, 0.5, 0.0), abs=1e-12
    )
    assert involutions.run_involution("fiedler", REGULAR).residuals["volume"] <= 1e-9
    with pytest.raises(ValueError):
        involutions.run_involution("mirror", SQUARE_F)
    assert isinstance(involutions.run_involution("orbit", FacialAreas(*SQUARE_F)).orbit, dict)
