import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Any

import numpy as np
import sympy

from config.settings import SEP_CONFIG
from src.rootsys import RootSystem, WeylElement, build_root_system, weyl_orbit
from src.cones import sign_vector_feasible
from src.tables import load_data_table

logger = logging.getLogger(__name__)


class _BudgetExceeded(Exception):
    pass


def _primitive(v: Sequence[int]) -> Tuple[int, ...]:
    g = math.gcd(*[int(c) for c in v])
    return tuple(int(c) // g for c in v) if g else tuple(int(c) for c in v)


def _hyperplane_key(v: Sequence[int]) -> Tuple[int, ...]:
    """Primitive representative with positive leading coordinate."""
    v = _primitive(v)
    lead = next(c for c in v if c != 0)
    return v if lead > 0 else tuple(-c for c in v)


def _as_element(R: RootSystem, chamber) -> WeylElement:
    if isinstance(chamber, WeylElement):
        return chamber
    return R.weyl_element(int(i) - 1 for i in chamber)


def _coverage_chunk(args) -> List[int]:
    matrices, rays = args
    ray_matrix = np.array(rays, dtype=np.int64)
    masks = []
    for matrix in matrices:
        covered = np.all(ray_matrix @ np.array(matrix, dtype=np.int64) > 0, axis=1)
        masks.append(sum(1 << int(i) for i in np.flatnonzero(covered)))
    return masks


class SeparationIndexSolver:
    """Minimum covers of the punctured dual space by open dual cones of Weyl chambers.

    A chamber w covers a linear form l when l > 0 on w(closure C) minus 0, i.e.
    l . (w omega_k) > 0 for every fundamental weight. The covering is decided on the
    one-dimensional cells of the arrangement cut out by the W-orbits of the
    fundamental weights; every other cell has such a ray on its boundary.
    """

    def __init__(self, time_budget_ms: Optional[int] = None, workers: int = 1):
        if workers < 1:
            raise ValueError(f"workers must be positive, got {workers}")
        self.time_budget_ms = time_budget_ms
        self.workers = workers
        self._deadline: Optional[float] = None

    # arrangement data

    def hyperplanes(self, R: RootSystem) -> List[Tuple[int, ...]]:
        keys = set()
        for k in range(R.rank):
            fundamental = tuple(1 if j == k else 0 for j in range(R.rank))
            for v in weyl_orbit(R, fundamental):
                keys.add(_hyperplane_key(v))
        return sorted(keys)

    def rays(self, R: RootSystem) -> List[Tuple[int, ...]]:
        """All one-dimensional cells of the orbit-normal arrangement in the dual space."""
        r = R.rank
        if r == 1:
            return [(1,), (-1,)]
        planes = np.array(self.hyperplanes(R), dtype=np.int64)
        found = set()
        for subset in combinations(range(len(planes)), r - 1):
            block = planes[list(subset)]
            # generalized cross product
            minors = [(-1) ** j * int(sympy.Matrix(np.delete(block, j, axis=1).tolist()).det(method="bareiss"))
                      for j in range(r)]
            if not any(minors):
                continue
            ray = _primitive(minors)
            found.add(ray)
            found.add(tuple(-c for c in ray))
        logger.info("%s: %d hyperplanes, %d rays", R.simple_type, len(planes), len(found))
        return sorted(found)

    def coverage(self, R: RootSystem, chambers: List[WeylElement], rays: List[Tuple[int, ...]]) -> List[int]:
        """Bitmask of covered rays for each chamber."""
        matrices = [element.matrix for element in chambers]
        if self.workers > 1 and len(matrices) > 1:
            size = -(-len(matrices) // self.workers)
            chunks = [(matrices[i:i + size], rays) for i in range(0, len(matrices), size)]
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                return [mask for part in pool.map(_coverage_chunk, chunks) for mask in part]
        return _coverage_chunk((matrices, rays))

    # cover search

    def _check_budget(self) -> None:
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise _BudgetExceeded()

    @staticmethod
    def _greedy(masks: List[int], universe: int, start: List[int]) -> List[int]:
        chosen = list(start)
        uncovered = universe
        for c in chosen:
            uncovered &= ~masks[c]
        while uncovered:
            best = max(range(len(masks)), key=lambda c: ((masks[c] & uncovered).bit_count(), -c))
            if not masks[best] & uncovered:
                raise ArithmeticError("Chamber list does not cover the dual space")
            chosen.append(best)
            uncovered &= ~masks[best]
        return chosen

    def minimum_cover(self, masks: List[int], universe: int, lower: int) -> Tuple[List[int], bool, int]:
        """Branch and bound. Returns (cover, finished, proven lower bound)."""
        best = self._greedy(masks, universe, [0])
        logger.info("greedy cover of size %d", len(best))
        max_cover = max(m.bit_count() for m in masks)
        n_rays = universe.bit_length()
        options = [[c for c, m in enumerate(masks) if m >> i & 1] for i in range(n_rays)]

        def search(uncovered: int, chosen: List[int]) -> None:
            nonlocal best
            self._check_budget()
            if not uncovered:
                if len(chosen) < len(best):
                    best = list(chosen)
                    logger.info("improved cover: %d chambers", len(best))
                return
            if len(chosen) + -(-uncovered.bit_count() // max_cover) >= len(best):
                return
            pivot = min((i for i in range(n_rays) if uncovered >> i & 1), key=lambda i: (len(options[i]), i))
            for c in options[pivot]:
                chosen.append(c)
                search(uncovered & ~masks[c], chosen)
                chosen.pop()

        # W permutes chambers transitively, so some minimum cover contains the identity
        try:
            search(universe & ~masks[0], [0])
        except _BudgetExceeded:
            return sorted(best), False, lower
        return sorted(best), True, len(best)

    def solve(self, R: RootSystem) -> Dict[str, Any]:
        bounds = sep_bounds(R)
        lo, hi = bounds["lower"], bounds["upper"]
        if R.rank > SEP_CONFIG["max_exact_rank"]:
            if self.time_budget_ms is None:
                raise NotImplementedError(f"sep for {R.simple_type} needs a time budget; only bounds are available")
            return {"status": "unknown", "type": str(R.simple_type), "bounds": [lo, hi], "source": bounds["source"]}

        self._deadline = None if self.time_budget_ms is None else time.monotonic() + self.time_budget_ms / 1000.0
        try:
            chambers = R.weyl_elements()
            rays = self.rays(R)
            self._check_budget()
        except _BudgetExceeded:
            return {"status": "unknown", "type": str(R.simple_type), "bounds": [lo, hi], "source": bounds["source"]}

        masks = self.coverage(R, chambers, rays)
        universe = (1 << len(rays)) - 1
        max_cover = max(m.bit_count() for m in masks)
        lower = max(lo, -(-len(rays) // max_cover))
        cover, finished, proven = self.minimum_cover(masks, universe, lower)

        witnesses = {}
        for i, ray in enumerate(rays):
            owner = next(pos for pos, c in enumerate(cover) if masks[c] >> i & 1)
            witnesses[",".join(str(x) for x in ray)] = owner
        certificate = {
            "chambers": [[i + 1 for i in chambers[c].word] for c in cover],
            "cell_witnesses": witnesses,
        }
        if not finished:
            logger.warning("sep budget exhausted for %s; bounds [%d, %d]", R.simple_type, lower, len(cover))
            return {
                "status": "unknown",
                "type": str(R.simple_type),
                "bounds": [lower, min(hi, len(cover))],
                "certificate": certificate,
                "proof_cells": len(rays),
            }
        value = len(cover)
        if not lo <= value <= hi:
            raise ArithmeticError(f"sep({R.simple_type}) = {value} violates bounds [{lo}, {hi}]")
        return {
            "status": "exact",
            "type": str(R.simple_type),
            "value": value,
            "certificate": certificate,
            "proof_cells": len(rays),
        }


def sep_bounds(R: RootSystem) -> Dict[str, Any]:
    """rank+1 <= sep <= |W| tightened by known values and documented upper bounds."""
    data = load_data_table("sep_bounds")
    name = str(R.simple_type)
    lower = R.rank + 1
    upper = R.weyl_group_order()
    source = "weyl-order"
    if name in data["exact"]:
        value = int(data["exact"][name])
        return {"lower": value, "upper": value, "exact": True, "source": "known-value"}
    if name in data["upper_bounds"]:
        upper = min(upper, int(data["upper_bounds"][name]))
        source = "documented-bound"
    elif R.simple_type.family in data["family_upper_bounds"]:
        l = sympy.Symbol("l")
        formula = sympy.sympify(data["family_upper_bounds"][R.simple_type.family], locals={"l": l})
        candidate = formula.subs(l, R.rank)
        if candidate.is_integer:
            upper = min(upper, int(candidate))
            source = "documented-bound"
    return {"lower": lower, "upper": upper, "exact": False, "source": source}


def sep_index(R: RootSystem, time_budget_ms: Optional[int] = None, workers: int = 1) -> Dict[str, Any]:
    return SeparationIndexSolver(time_budget_ms, workers).solve(R)


# verification by full cell enumeration

def arrangement_cells(normals: List[Tuple[int, ...]]) -> List[Tuple[int, ...]]:
    """Sign vectors of all nonzero cells of a central arrangement."""
    partial: List[Tuple[int, ...]] = [()]
    for k in range(len(normals)):
        extended = []
        for signs in partial:
            for s in (-1, 0, 1):
                candidate = signs + (s,)
                if sign_vector_feasible(normals[: k + 1], candidate):
                    extended.append(candidate)
        partial = extended
    return [signs for signs in partial if any(signs)]


def verify_separating(R: RootSystem, chambers: Sequence) -> bool:
    """Do the open dual cones of the chambers cover the punctured dual space?"""
    if not chambers:
        raise ValueError("Chamber list must be nonempty")
    elements = [_as_element(R, c) for c in chambers]
    planes = sorted({_hyperplane_key(e.column(k)) for e in elements for k in range(R.rank)})
    index = {p: i for i, p in enumerate(planes)}
    # each chamber normal as (hyperplane index, orientation)
    oriented = []
    for e in elements:
        entries = []
        for k in range(R.rank):
            column = _primitive(e.column(k))
            key = _hyperplane_key(column)
            entries.append((index[key], 1 if column == key else -1))
        oriented.append(entries)
    cells = arrangement_cells(planes)
    logger.debug("verify_separating: %d hyperplanes, %d cells", len(planes), len(cells))
    for signs in cells:
        if not any(all(signs[i] * o == 1 for i, o in entries) for entries in oriented):
            return False
    return True


def is_minimal_certificate(R: RootSystem, chambers: Sequence) -> bool:
    chambers = list(chambers)
    if not verify_separating(R, chambers):
        return False
    return all(not verify_separating(R, chambers[:i] + chambers[i + 1:]) for i in range(len(chambers)))


# dihedral groups

def _dihedral_arcs(p: int) -> Tuple[int, int, List[int]]:
    """Open arcs of positive linear forms, in units of pi/(4p) on a circle of 8p units."""
    circle = 8 * p
    width = 4 * p - 4
    starts = [(4 * k + 4 - 2 * p) % circle for k in range(2 * p)]
    return circle, width, starts


def dihedral_certificate(p: int) -> List[int]:
    """Indices of chambers (rotations by k*pi/p) forming a minimum separating set of I_2(p)."""
    if p < 3:
        raise ValueError(f"Dihedral order p must be at least 3, got {p}")
    circle, width, starts = _dihedral_arcs(p)
    chosen = [0]
    # arc 0 is (s0, s0 + width); cover the points s0 + width .. s0 + circle on the unrolled line
    s0 = starts[0]
    point = s0 + width
    last = s0 + circle
    while point <= last:
        best, reach = None, None
        for k, start in enumerate(starts):
            offset = (point - start) % circle
            if 0 < offset < width:
                end = point + (width - offset) - 1
                if reach is None or end > reach:
                    best, reach = k, end
        if best is None:
            raise ArithmeticError(f"Point {point} of the circle is not covered for p={p}")
        chosen.append(best)
        point = reach + 1
    return sorted(set(chosen))


def sep_index_dihedral(p: int) -> int:
    return len(dihedral_certificate(p))


def sep_for_type(type_name: str, time_budget_ms: Optional[int] = None) -> Dict[str, Any]:
    return sep_index(build_root_system(type_name), time_budget_ms)
