from itertools import combinations_with_replacement

import numpy as np
import pytest

from src.quiver import (
    StarQuiver,
    canonical_decomposition,
    castling_reduce,
    dimension_count_obstruction,
    euler_form,
    generic_ext,
    generic_hom,
    is_primitive_sln_fund,
    is_schur_root,
    open_orbit_oracle,
    sln_fund_certificate,
    tangent_matrix,
)


def test_euler_form():
    assert euler_form(3, (2, 1, 1, 1), (2, 1, 1, 1)) == 1
    assert euler_form(4, (2, 1, 1, 1, 1), (2, 1, 1, 1, 1)) == 0
    assert euler_form(2, (0, 1, 0), (1, 0, 0)) == -1
    with pytest.raises(ValueError):
        euler_form(2, (1, 1), (1, 1, 1))


def test_generic_ext_and_hom_between_simples():
    assert generic_ext((0, 1, 0), (1, 0, 0)) == 1
    assert generic_hom((0, 1, 0), (1, 0, 0)) == 0
    assert generic_ext((1, 0, 0), (0, 1, 0)) == 0


def test_real_root_of_the_three_arm_star():
    decomposition = canonical_decomposition(3, (2, 1, 1, 1))
    assert decomposition.summands == [((2, 1, 1, 1), 1)]
    assert decomposition.all_real()
    assert decomposition.to_dict()["summands"][0]["kind"] == "real"


def test_null_root_of_the_four_arm_star_is_one_isotropic_summand():
    decomposition = canonical_decomposition(4, (2, 1, 1, 1, 1))
    assert decomposition.summands == [((2, 1, 1, 1, 1), 1)]
    assert decomposition.kinds[(2, 1, 1, 1, 1)] == "isotropic"
    assert not decomposition.all_real()


def test_leaf_kernels_split_off_as_simples():
    decomposition = canonical_decomposition(2, (1, 2, 0))
    assert decomposition.summands == [((0, 1, 0), 1), ((1, 1, 0), 1)]
    assert decomposition.total() == (1, 2, 0)


def test_centre_cokernel_splits_off():
    decomposition = canonical_decomposition(2, (3, 1, 1))
    assert ((1, 0, 0), 1) in decomposition.summands
    assert decomposition.total() == (3, 1, 1)


@pytest.mark.parametrize("gamma", [(3, 2, 2, 1, 1), (2, 2, 2, 0, 0), (4, 2, 2, 2, 2), (3, 1, 1, 1, 1)])
def test_decomposition_sums_back_to_the_vector(gamma):
    assert canonical_decomposition(4, gamma).total() == gamma


def test_decomposition_rejects_bad_vectors():
    with pytest.raises(ValueError):
        canonical_decomposition(2, (1, 1))
    with pytest.raises(ValueError):
        canonical_decomposition(2, (1, -1, 0))
    with pytest.raises(NotImplementedError):
        canonical_decomposition(2, (30, 20, 20))


def test_schur_roots():
    assert is_schur_root((2, 1, 1, 1, 1))
    assert is_schur_root((1, 1, 1, 0, 0))
    assert not is_schur_root((2, 2, 2, 0, 0))
    assert not is_schur_root((0, 0, 0))


def test_castling_reduces_three_points_on_a_line_to_nothing():
    chain = castling_reduce((2, 1, 1, 1))
    assert chain["trivial"]
    assert chain["steps"][0]["op"] == "reflect-centre"


def test_dimension_count_obstruction():
    assert dimension_count_obstruction((2, 1, 1, 1, 1))
    assert not dimension_count_obstruction((2, 1, 1, 1))


def test_sl2_fundamental_tuples():
    assert is_primitive_sln_fund(2, [1, 1, 1])
    certificate = sln_fund_certificate(2, [1, 1, 1, 1])
    assert not certificate["open"]
    assert certificate["reason"] == "dimension-count"


def test_isotropic_summand_blocks_an_open_orbit():
    assert not is_primitive_sln_fund(3, [2, 2, 1, 1])
    assert any(kind == "isotropic" for kind in canonical_decomposition(4, (3, 2, 2, 1, 1)).kinds.values())


def test_fundamental_index_out_of_range():
    with pytest.raises(ValueError):
        sln_fund_certificate(3, [3])
    with pytest.raises(ValueError):
        sln_fund_certificate(1, [1])


def test_tangent_matrix_shape():
    gamma = (2, 1, 1, 1)
    maps = [np.ones((2, 1), dtype=np.int64)] * 3
    assert tangent_matrix(gamma, maps).shape == (2 * 3, 4 + 3)


def test_oracle_finds_the_open_orbit_of_three_points():
    result = open_orbit_oracle(3, (2, 1, 1, 1), samples=20, seed=42)
    assert result["status"] == "open"
    assert result["orbit_dim"] == result["dim_rep"] == 6
    again = open_orbit_oracle(3, (2, 1, 1, 1), samples=20, seed=42)
    assert again["witness_digest"] == result["witness_digest"]


def test_oracle_never_opens_the_null_root():
    result = open_orbit_oracle(4, (2, 1, 1, 1, 1), samples=5, seed=7)
    assert result["status"] == "probably_not_open"
    assert result["orbit_dim"] < result["dim_rep"]


def test_oracle_rejects_bad_arguments():
    with pytest.raises(ValueError):
        open_orbit_oracle(3, (2, 1, 1), samples=5)
    with pytest.raises(ValueError):
        open_orbit_oracle(3, (2, 1, 1, 1), samples=0)


def test_oracle_result_does_not_depend_on_worker_count():
    serial = open_orbit_oracle(4, (3, 2, 2, 1, 1), samples=4, seed=11, workers=1)
    pooled = open_orbit_oracle(4, (3, 2, 2, 1, 1), samples=4, seed=11, workers=2)
    assert serial["status"] == pooled["status"] == "probably_not_open"
    assert serial["orbit_dim"] == pooled["orbit_dim"]


def _fundamental_tuples(max_n, extra_arms):
    for n in range(2, max_n + 1):
        for d in range(1, n + extra_arms + 1):
            for indices in combinations_with_replacement(range(1, n), d):
                yield n, list(indices)


def test_quiver_criterion_agrees_with_the_oracle_for_small_n():
    for n, indices in _fundamental_tuples(4, 2):
        expected = is_primitive_sln_fund(n, indices)
        oracle = open_orbit_oracle(len(indices), [n] + indices, samples=20, seed=42)
        if oracle["status"] == "open":
            assert expected, (n, indices)
        else:
            assert not expected, (n, indices)


@pytest.mark.slow
def test_quiver_criterion_agrees_with_the_oracle_up_to_sl8():
    for n, indices in _fundamental_tuples(8, 2):
        oracle = open_orbit_oracle(len(indices), [n] + indices, samples=20, seed=42)
        assert (oracle["status"] == "open") == is_primitive_sln_fund(n, indices), (n, indices)


def test_star_quiver_memoizes_subrepresentations():
    quiver = StarQuiver()
    assert quiver.is_generic_sub((1, 1, 1, 0, 0), (2, 2, 2, 0, 0))
    assert quiver._sub_memo
