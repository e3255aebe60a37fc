from fractions import Fraction

import numpy as np
import pytest

from src.chars import CharacterEngine
from src.rootsys import (
    SimpleType,
    bound_bG,
    bound_data,
    build_root_system,
    dual_weight,
    levi_dimension,
    same_parabolic,
    support,
    validate_weight,
    weyl_orbit,
)


@pytest.mark.parametrize(
    "name,positive,dim_g",
    [("A1", 1, 3), ("A2", 3, 8), ("C2", 4, 10), ("G2", 6, 14), ("F4", 24, 52), ("E6", 36, 78), ("E8", 120, 248)],
)
def test_positive_roots_and_dimension(name, positive, dim_g):
    R = build_root_system(name)
    assert len(R.positive_roots) == positive
    assert R.dim_g == dim_g


def test_b2_is_stored_as_c2():
    assert str(SimpleType.parse("b2")) == "C2"
    assert build_root_system("B2") == build_root_system("C2")


@pytest.mark.parametrize("text", ["A0", "B1", "D3", "E9", "F3", "Q2", "A", "2A"])
def test_malformed_type_strings_are_rejected(text):
    with pytest.raises(ValueError):
        build_root_system(text)


@pytest.mark.parametrize("name,order", [("A1", 2), ("A3", 24), ("B3", 48), ("D4", 192), ("G2", 12), ("E6", 51840)])
def test_weyl_group_order(name, order):
    assert build_root_system(name).weyl_group_order() == order


def test_weyl_elements_enumerate_the_group_by_length():
    R = build_root_system("A2")
    elements = R.weyl_elements()
    assert len(elements) == 6
    assert elements[0].word == ()
    assert len({e.matrix for e in elements}) == 6
    lengths = [len(e.word) for e in elements]
    assert lengths == sorted(lengths)


def test_simple_reflection_acts_on_weight_coordinates():
    R = build_root_system("A1")
    s1 = R.weyl_element([0])
    assert s1.apply((1,)) == (-1,)
    assert s1.to_dict()["word"] == [1]


def test_to_dominant_returns_the_dominant_representative():
    R = build_root_system("A2")
    dominant, _, _ = R.to_dominant((-1, 2))
    assert dominant == (1, 1)
    assert R.is_dominant(dominant)
    assert R.dominant_representative((0, -1)) == (1, 0)


@pytest.mark.parametrize(
    "name,weight,dual",
    [
        ("A3", (1, 0, 0), (0, 0, 1)),
        ("A3", (0, 1, 0), (0, 1, 0)),
        ("C3", (1, 2, 0), (1, 2, 0)),
        ("D4", (0, 0, 1, 0), (0, 0, 1, 0)),
        ("D5", (0, 0, 0, 1, 0), (0, 0, 0, 0, 1)),
        ("E6", (1, 0, 0, 0, 0, 0), (0, 0, 0, 0, 0, 1)),
        ("E7", (0, 0, 0, 0, 0, 0, 1), (0, 0, 0, 0, 0, 0, 1)),
    ],
)
def test_dual_weight(name, weight, dual):
    assert dual_weight(build_root_system(name), weight) == dual


@pytest.mark.parametrize(
    "name,weight",
    [("A3", (1, 0, 0)), ("A3", (0, 1, 1)), ("D5", (0, 0, 0, 1, 0)), ("C2", (1, 1)), ("G2", (1, 0))],
)
def test_weight_and_its_dual_pair_to_one_invariant(name, weight):
    R = build_root_system(name)
    assert CharacterEngine().lr_coefficient(R, [weight, dual_weight(R, weight)], tuple([0] * R.rank)) == 1


def test_validate_weight_rejects_wrong_length_and_negative_entries():
    R = build_root_system("A2")
    assert validate_weight(R, [1, 0]) == (1, 0)
    with pytest.raises(ValueError):
        validate_weight(R, (1, 0, 0))
    with pytest.raises(ValueError):
        validate_weight(R, (1, -1))


def test_support_is_one_based():
    assert support((0, 2, 0, 1)) == frozenset({2, 4})


def test_same_parabolic_compares_supports():
    assert same_parabolic((0, 2, 0, 1), (0, 1, 0, 5))
    assert not same_parabolic((1, 0, 0, 0), (1, 1, 0, 0))


def test_weyl_orbit_of_the_first_fundamental_weight_of_a2():
    R = build_root_system("A2")
    assert weyl_orbit(R, (1, 0)) == {(1, 0), (-1, 1), (0, -1)}


def test_parabolic_codimension():
    A3 = build_root_system("A3")
    assert A3.parabolic_codim({1}) == 3
    assert A3.parabolic_codim({2}) == 4
    assert A3.parabolic_codim({1, 2, 3}) == 6
    assert build_root_system("A1").parabolic_codim({1}) == 1


def test_levi_dimension_of_e6_end_nodes():
    R = build_root_system("E6")
    assert levi_dimension(R, 1) == 46
    assert levi_dimension(R, 6) == 46
    with pytest.raises(ValueError):
        levi_dimension(R, 7)


@pytest.mark.parametrize(
    "name,argmax,ratio,bound",
    [
        ("A1", [1], Fraction(3), 3),
        ("C2", [1, 2], Fraction(10, 3), 3),
        ("D4", [1, 3, 4], Fraction(14, 3), 4),
        ("E6", [1, 6], Fraction(39, 8), 4),
    ],
)
def test_bound_data(name, argmax, ratio, bound):
    data = bound_data(build_root_system(name))
    assert data["argmax_nodes"] == argmax
    assert data["ratio"] == ratio
    assert data["bound"] == bound
    assert bound_bG(build_root_system(name)) == bound


@pytest.mark.parametrize("name,count", [("A1", 1), ("A3", 2), ("B3", 1), ("D4", 6), ("D5", 2), ("E6", 2), ("E7", 1)])
def test_diagram_automorphisms(name, count):
    autos = build_root_system(name).diagram_automorphisms()
    assert len(autos) == count
    assert tuple(range(1, build_root_system(name).rank + 1)) in autos


TYPES_UP_TO_RANK_8 = (
    [f"A{l}" for l in range(1, 9)] + [f"B{l}" for l in range(3, 9)] + [f"C{l}" for l in range(2, 9)]
    + [f"D{l}" for l in range(4, 9)] + ["E6", "E7", "E8", "F4", "G2"]
)
TYPES_UP_TO_RANK_4 = ["A1", "A2", "A3", "A4", "B3", "B4", "C2", "C3", "C4", "D4", "F4", "G2"]


@pytest.mark.parametrize("name", TYPES_UP_TO_RANK_8)
def test_inverse_cartan_matrix_is_positive(name):
    R = build_root_system(name)
    r = R.rank
    for i in range(r):
        for j in range(r):
            entry = sum(Fraction(R.cartan[i][k]) * R.inv_cartan[k][j] for k in range(r))
            assert entry == (1 if i == j else 0)
    assert all(value > 0 for row in R.inv_cartan for value in row)


@pytest.mark.parametrize("name", TYPES_UP_TO_RANK_8)
def test_dual_weight_is_an_involution_on_random_weights(name):
    R = build_root_system(name)
    rng = np.random.default_rng(5)
    for _ in range(20):
        weight = tuple(int(c) for c in rng.integers(0, 6, size=R.rank))
        dual = dual_weight(R, weight)
        assert R.is_dominant(dual)
        assert sum(dual) == sum(weight)
        assert dual_weight(R, dual) == weight


@pytest.mark.parametrize("name", TYPES_UP_TO_RANK_4)
def test_strictly_dominant_orbits_are_regular(name):
    R = build_root_system(name)
    order = R.weyl_group_order()
    rng = np.random.default_rng(13)
    weights = [R.rho] + [tuple(int(c) for c in rng.integers(1, 5, size=R.rank)) for _ in range(2)]
    for weight in weights:
        assert len(weyl_orbit(R, weight)) == order
