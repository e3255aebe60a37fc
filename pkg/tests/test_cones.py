from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from config.settings import CONES_CONFIG

from src.cones import (
    RationalCone,
    chamber_generators,
    cone_dimension,
    cone_member,
    fm_cone_member,
    fm_zero_in_interior_conv,
    fourier_motzkin_feasible,
    interiors_intersect,
    ray_in_cone,
    sign_vector_feasible,
    suter_chambers,
    zero_in_conv,
    zero_in_interior_conv,
)
from src.rootsys import build_root_system

QUADRANT = [(1, 0), (0, 1)]


def test_cone_dimension():
    assert cone_dimension([]) == 0
    assert cone_dimension([(0, 0)]) == 0
    assert cone_dimension([(1, 0), (2, 0)]) == 1
    assert cone_dimension([(1, 0, 0), (0, 1, 0), (1, 1, 0)]) == 2


def test_cone_membership_and_relative_interior():
    assert cone_member(QUADRANT, (1, 1))
    assert cone_member(QUADRANT, (1, 0))
    assert not cone_member(QUADRANT, (1, 0), strict=True)
    assert cone_member(QUADRANT, (Fraction(1, 3), Fraction(2, 7)), strict=True)
    assert not cone_member(QUADRANT, (-1, 1))


def test_relative_interior_of_a_lower_dimensional_cone():
    ray = [(1, 1, 0)]
    assert cone_member(ray, (2, 2, 0), strict=True)
    assert not cone_member(ray, (0, 0, 0), strict=True)


def test_zero_cone():
    assert cone_member([], (0, 0))
    assert not cone_member([], (0, 0), strict=True)
    assert not cone_member([(0, 0)], (1, 0))


def test_rational_cone_object():
    C = RationalCone.from_vectors(QUADRANT)
    assert C.is_full_dimensional()
    assert C.contains((3, 4), strict=True)
    with pytest.raises(ValueError):
        RationalCone.from_vectors([(1, 0), (1, 0, 0)])
    with pytest.raises(ValueError):
        RationalCone.from_vectors([])
    with pytest.raises(ValueError):
        cone_member(C, (1, 0, 0))


def test_zero_in_interior_of_convex_hull():
    assert zero_in_interior_conv([(1, 0), (-1, 1), (-1, -1)])
    assert zero_in_interior_conv([(1,), (-1,)])
    assert not zero_in_interior_conv([(1, 0), (0, 1), (-1, 0)])
    assert zero_in_interior_conv([(1, 0), (-1, 0)])
    assert not zero_in_interior_conv([(1, 0), (-1, 0)], full_dimensional=True)
    assert zero_in_conv([(1, 0), (0, 1), (-1, 0)])
    assert not zero_in_conv([(1, 0), (0, 1)])
    with pytest.raises(ValueError):
        zero_in_interior_conv([])


def test_interiors_intersect():
    assert interiors_intersect(QUADRANT, [(1, 1)])
    assert not interiors_intersect(QUADRANT, [(1, 0)])
    assert not interiors_intersect([(1, 0)], [(0, 1)])
    assert not interiors_intersect(QUADRANT, [(0, 0)])
    with pytest.raises(ValueError):
        interiors_intersect(QUADRANT, [(1, 0, 0)])


def test_ray_in_cone():
    assert ray_in_cone((2, 2), QUADRANT)
    assert ray_in_cone((1, 0), QUADRANT)
    assert not ray_in_cone((-1, 0), QUADRANT)
    assert ray_in_cone((0, 0), [])


def test_sign_vectors_of_the_coordinate_arrangement():
    normals = [(1, 0), (0, 1), (1, 1)]
    assert sign_vector_feasible(normals, (1, 1, 1))
    assert sign_vector_feasible(normals, (1, -1, 0))
    assert not sign_vector_feasible(normals, (1, 1, -1))
    assert not sign_vector_feasible(normals, (0, 0, 1))
    with pytest.raises(ValueError):
        sign_vector_feasible(normals, (1, 1))


def test_fourier_motzkin_strict_system():
    # x < 1 and -x < -1 has no solution, x <= 1 and -x <= -1 does
    assert not fourier_motzkin_feasible([((Fraction(1),), Fraction(1), True), ((Fraction(-1),), Fraction(-1), False)], 1)
    assert fourier_motzkin_feasible([((Fraction(1),), Fraction(1), False), ((Fraction(-1),), Fraction(-1), False)], 1)


def test_simplex_agrees_with_fourier_motzkin():
    generators = [(1, 0, 1), (0, 1, 1), (-1, 0, 1)]
    points = [p for p in product(range(-2, 3), repeat=3)]
    for x in points:
        for strict in (False, True):
            assert cone_member(generators, x, strict=strict) == fm_cone_member(generators, x, strict=strict), (x, strict)


def test_closed_orbit_criterion_agrees_with_fourier_motzkin():
    triples = [
        [(1, 0), (-1, 1), (-1, -1)],
        [(1, 0), (0, 1), (-1, 0)],
        [(2, 1), (-1, 2), (-1, -3)],
        [(1, 1), (-1, -1), (0, 1)],
    ]
    for points in triples:
        assert zero_in_interior_conv(points) == fm_zero_in_interior_conv(points), points


@pytest.mark.parametrize("name", ["A1", "A2", "C2", "G2", "A3"])
def test_suter_chambers_have_zero_in_every_selection(name):
    R = build_root_system(name)
    chambers = suter_chambers(R)
    assert len(chambers) == R.rank + 1
    generator_sets = [chamber_generators(e) for e in chambers]
    for choice in product(range(R.rank), repeat=R.rank + 1):
        points = [generator_sets[i][k] for i, k in enumerate(choice)]
        assert zero_in_conv(points), choice


def _random_selection(rng, chambers, rank):
    """One point from the closure of each chamber."""
    coord_range = CONES_CONFIG["random_coord_range"]
    points = []
    for element in chambers:
        weight = [int(c) for c in rng.integers(0, coord_range + 1, size=rank)]
        if not any(weight):
            weight[int(rng.integers(rank))] = 1
        points.append(element.apply(weight))
    return points


def _check_suter_property(name, draws, seed=0):
    R = build_root_system(name)
    chambers = suter_chambers(R)
    rng = np.random.default_rng(seed)
    for _ in range(draws):
        points = _random_selection(rng, chambers, R.rank)
        assert zero_in_conv(points), points


@pytest.mark.parametrize("name", ["A2", "C2"])
def test_suter_property_on_random_selections(name):
    _check_suter_property(name, draws=200)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["A1", "A2", "A3", "A4", "B3", "B4", "C2", "C3", "C4", "D4", "F4", "G2"])
def test_suter_property_full_draw_count(name):
    _check_suter_property(name, draws=CONES_CONFIG["suter_draws"])


def _random_membership_instances(seed, count, dim):
    coord_range = CONES_CONFIG["random_coord_range"]
    rng = np.random.default_rng(seed)
    for _ in range(count):
        k = int(rng.integers(1, 4 if dim <= 3 else 3))
        generators = [tuple(int(c) for c in rng.integers(-coord_range, coord_range + 1, size=dim)) for _ in range(k)]
        x = tuple(int(c) for c in rng.integers(-coord_range, coord_range + 1, size=dim))
        yield generators, x


@pytest.mark.parametrize("dim", [2, 3])
def test_cone_member_agrees_with_elimination_on_random_instances(dim):
    for generators, x in _random_membership_instances(dim, 100, dim):
        assert cone_member(generators, x) == fm_cone_member(generators, x), (generators, x)
        assert cone_member(generators, x, strict=True) == fm_cone_member(generators, x, strict=True), (generators, x)


@pytest.mark.slow
@pytest.mark.parametrize("dim", [2, 3, 4, 5])
def test_cone_member_agrees_with_elimination_at_scale(dim):
    for generators, x in _random_membership_instances(100 + dim, 2500, dim):
        assert cone_member(generators, x) == fm_cone_member(generators, x), (generators, x)
