import math

import pytest

from src.rootsys import build_root_system
from src.sep import (
    SeparationIndexSolver,
    dihedral_certificate,
    is_minimal_certificate,
    sep_bounds,
    sep_for_type,
    sep_index,
    sep_index_dihedral,
    verify_separating,
)
from utils.helpers import exact_rank


@pytest.mark.parametrize("name,value", [("A1", 2), ("A2", 6), ("C2", 4), ("G2", 3)])
def test_exact_separation_index_of_small_types(name, value):
    result = sep_index(build_root_system(name), time_budget_ms=60000)
    assert result["status"] == "exact"
    assert result["value"] == value
    assert len(result["certificate"]["chambers"]) == value


@pytest.mark.parametrize("name", ["A1", "A2", "C2", "G2"])
def test_certificates_separate_and_are_minimal(name):
    R = build_root_system(name)
    chambers = sep_index(R, time_budget_ms=60000)["certificate"]["chambers"]
    assert verify_separating(R, chambers)
    assert is_minimal_certificate(R, chambers)


def test_sl2_certificate_is_identity_and_reflection():
    result = sep_for_type("A1")
    assert sorted(result["certificate"]["chambers"]) == [[], [1]]


def test_a_single_chamber_does_not_separate():
    R = build_root_system("A2")
    assert not verify_separating(R, [[]])
    with pytest.raises(ValueError):
        verify_separating(R, [])


def test_cell_witnesses_name_a_chamber_of_the_certificate():
    result = sep_index(build_root_system("C2"), time_budget_ms=60000)
    chambers = result["certificate"]["chambers"]
    witnesses = result["certificate"]["cell_witnesses"]
    assert len(witnesses) == result["proof_cells"]
    assert set(witnesses.values()) <= set(range(len(chambers)))


@pytest.mark.parametrize(
    "p,value", [(3, 6), (4, 4), (5, 4), (6, 3), (7, 3), (8, 3), (20, 3), (100, 3)]
)
def test_dihedral_separation_index(p, value):
    assert sep_index_dihedral(p) == value
    assert len(dihedral_certificate(p)) == value


def test_dihedral_order_below_three_is_rejected():
    with pytest.raises(ValueError):
        dihedral_certificate(2)


@pytest.mark.parametrize("name,p", [("A2", 3), ("C2", 4), ("G2", 6)])
def test_rank_two_types_match_their_dihedral_value(name, p):
    assert sep_index(build_root_system(name), time_budget_ms=60000)["value"] == sep_index_dihedral(p)


def test_bounds():
    assert sep_bounds(build_root_system("A1")) == {"lower": 2, "upper": 2, "exact": True, "source": "known-value"}
    b = sep_bounds(build_root_system("E6"))
    assert b["lower"] == 7
    assert b["upper"] == 242
    assert b["source"] == "documented-bound"
    a4 = sep_bounds(build_root_system("A4"))
    assert a4["upper"] == min(120, 2 * 24 + 2)


def test_large_rank_needs_a_budget():
    R = build_root_system("A5")
    with pytest.raises(NotImplementedError):
        SeparationIndexSolver().solve(R)
    result = sep_index(R, time_budget_ms=10)
    assert result["status"] == "unknown"
    assert result["bounds"][0] <= result["bounds"][1]


def test_exhausted_budget_reports_bounds():
    result = sep_index(build_root_system("A3"), time_budget_ms=1)
    assert result["status"] in ("unknown", "exact")
    if result["status"] == "unknown":
        lo, hi = result["bounds"]
        assert 4 <= lo <= hi


@pytest.mark.parametrize("name", ["A2", "A3", "B3", "C3"])
def test_rays_are_exact_intersections_of_orbit_hyperplanes(name):
    R = build_root_system(name)
    solver = SeparationIndexSolver()
    planes = solver.hyperplanes(R)
    rays = solver.rays(R)
    assert len(set(rays)) == len(rays)
    for ray in rays:
        assert all(isinstance(c, int) for c in ray)
        assert math.gcd(*ray) == 1
        assert tuple(-c for c in ray) in rays
        orthogonal = [p for p in planes if sum(a * b for a, b in zip(p, ray)) == 0]
        assert exact_rank(orthogonal) == R.rank - 1


@pytest.mark.parametrize("name", ["C2", "A3"])
def test_pooled_coverage_matches_serial(name):
    R = build_root_system(name)
    serial = SeparationIndexSolver()
    pooled = SeparationIndexSolver(workers=2)
    chambers = R.weyl_elements()
    rays = serial.rays(R)
    assert pooled.coverage(R, chambers, rays) == serial.coverage(R, chambers, rays)


def test_pooled_solve_finds_the_same_index():
    result = sep_index(build_root_system("C2"), time_budget_ms=60000, workers=2)
    assert result["status"] == "exact"
    assert result["value"] == 4
    with pytest.raises(ValueError):
        SeparationIndexSolver(workers=0)
