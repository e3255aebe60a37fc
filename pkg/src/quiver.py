import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from typing import Dict, List, Tuple, Any, Optional, Sequence

import numpy as np

from config.settings import QUIVER_CONFIG
from utils.helpers import modular_rank, digest

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]


@dataclass
class CanonicalDecomposition:
    """Generic direct-sum decomposition; index 0 of every vector is the central sink."""
    summands: List[Tuple[Vector, int]]
    kinds: Dict[Vector, str] = field(default_factory=dict)

    def total(self) -> Vector:
        length = len(self.summands[0][0]) if self.summands else 0
        return tuple(sum(m * beta[i] for beta, m in self.summands) for i in range(length))

    def all_real(self) -> bool:
        return all(kind == "real" for kind in self.kinds.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "summands": [{"root": list(beta), "multiplicity": m, "kind": self.kinds[beta]} for beta, m in self.summands],
        }


def euler_form(d: int, x: Sequence[int], y: Sequence[int]) -> int:
    """<x, y> = sum x_i y_i - y_centre * sum of x over the d outer vertices."""
    if len(x) != d + 1 or len(y) != d + 1:
        raise ValueError(f"Vectors must have length {d + 1} for {d} arms")
    return sum(a * b for a, b in zip(x, y)) - y[0] * sum(x[1:])


def _form(x: Sequence[int], y: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(x, y)) - y[0] * sum(x[1:])


def _classify(beta: Vector) -> str:
    q = _form(beta, beta)
    if q == 1:
        return "real"
    if q == 0:
        return "isotropic"
    return "imaginary"


class StarQuiver:
    """Generic representation theory of the star quiver with d arms into one sink.

    Generic subrepresentations follow the recursion
        a ↪ b  iff  ext(a, b - a) = 0,
        ext(a, c) > 0  iff  some nonzero a' ↪ a has <a', c> < 0,
    evaluated only on candidates making the Euler form negative and one
    representative per permutation of interchangeable arms.
    """

    def __init__(self):
        self._sub_memo: Dict[Tuple, bool] = {}
        self._ext_memo: Dict[Tuple, bool] = {}
        self._canon_memo: Dict[Vector, List[Vector]] = {}

    # candidate enumeration

    @staticmethod
    def _canonical_pair(x: Vector, y: Vector) -> Tuple:
        arms = sorted((x[k], y[k]) for k in range(1, len(x)) if x[k] or y[k])
        return (x[0], y[0], tuple(arms))

    @staticmethod
    def _candidates(x: Vector, y: Vector) -> List[Tuple[int, Vector]]:
        """Nonzero x'' <= x with <x'', y> < 0, one per orbit of arms sharing (x_k, y_k)."""
        groups: Dict[Tuple[int, int], List[int]] = {}
        for k in range(1, len(x)):
            if x[k]:
                groups.setdefault((x[k], y[k]), []).append(k)
        keys = sorted(groups)
        found = []
        for c0 in range(x[0] + 1):
            options = []
            for xk, yk in keys:
                # the image of B''_k lies in A'', up to the kernel of the generic map
                cap = min(xk, c0 + max(0, xk - x[0]))
                options.append(list(combinations_with_replacement(range(cap + 1), len(groups[(xk, yk)]))))
            for choice in product(*options):
                vec = [0] * len(x)
                vec[0] = c0
                for key, values in zip(keys, choice):
                    for position, value in zip(groups[key], values):
                        vec[position] = value
                vec = tuple(vec)
                if not any(vec):
                    continue
                value = _form(vec, y)
                if value < 0:
                    found.append((value, vec))
        found.sort()
        return found

    # generic ext and subrepresentations

    def ext_positive(self, x: Vector, y: Vector) -> bool:
        key = self._canonical_pair(x, y)
        if key in self._ext_memo:
            return self._ext_memo[key]
        result = any(self.is_generic_sub(c, x) for _, c in self._candidates(x, y))
        self._ext_memo[key] = result
        return result

    def is_generic_sub(self, sub: Vector, x: Vector) -> bool:
        """Does a general representation of dimension x have a subrepresentation of dimension sub?"""
        if any(s > t for s, t in zip(sub, x)) or any(s < 0 for s in sub):
            return False
        if not any(sub) or tuple(sub) == tuple(x):
            return True
        key = self._canonical_pair(x, sub)
        if key in self._sub_memo:
            return self._sub_memo[key]
        rest = tuple(t - s for s, t in zip(sub, x))
        result = not self.ext_positive(tuple(sub), rest)
        self._sub_memo[key] = result
        return result

    def generic_ext(self, x: Vector, y: Vector) -> int:
        for value, c in self._candidates(x, y):
            if self.is_generic_sub(c, x):
                return -value
        return 0

    def generic_hom(self, x: Vector, y: Vector) -> int:
        return _form(x, y) + self.generic_ext(x, y)

    def generic_subvectors(self, x: Vector) -> List[Vector]:
        boxes = [range(c + 1) for c in x]
        return [v for v in product(*boxes) if self.is_generic_sub(v, x)]

    def is_schur_root(self, x: Vector) -> bool:
        """A general representation is a brick: <b, x> - <x, b> > 0 for proper generic subvectors b."""
        if not any(x):
            return False
        for v in self.generic_subvectors(x):
            if not any(v) or v == tuple(x):
                continue
            if _form(v, x) - _form(x, v) <= 0:
                return False
        return True

    # canonical decomposition

    @staticmethod
    def split_simples(x: Vector) -> Tuple[Vector, List[Vector]]:
        """Split leaf kernels S_k^(b_k - a), then the centre cokernel S_0^(a - sum b)."""
        x = list(x)
        simples: List[Vector] = []
        for k in range(1, len(x)):
            if x[k] > x[0]:
                e = tuple(1 if j == k else 0 for j in range(len(x)))
                simples.extend([e] * (x[k] - x[0]))
                x[k] = x[0]
        surplus = x[0] - sum(x[1:])
        if surplus > 0:
            e = tuple(1 if j == 0 else 0 for j in range(len(x)))
            simples.extend([e] * surplus)
            x[0] -= surplus
        return tuple(x), simples

    @staticmethod
    def _split_candidates(x: Vector) -> List[Vector]:
        """Proper nonzero beta <= x, one per orbit of equal arms, both beta and x - beta admissible as subs."""
        groups: Dict[int, List[int]] = {}
        for k in range(1, len(x)):
            if x[k]:
                groups.setdefault(x[k], []).append(k)
        keys = sorted(groups)
        slack = {xk: max(0, xk - x[0]) for xk in keys}
        found = []
        for c0 in range(x[0] + 1):
            r0 = x[0] - c0
            options = []
            for xk in keys:
                lo = max(0, xk - (r0 + slack[xk]))
                hi = min(xk, c0 + slack[xk])
                if lo > hi:
                    options = None
                    break
                options.append(list(combinations_with_replacement(range(lo, hi + 1), len(groups[xk]))))
            if options is None:
                continue
            for choice in product(*options):
                vec = [0] * len(x)
                vec[0] = c0
                for xk, values in zip(keys, choice):
                    for position, value in zip(groups[xk], values):
                        vec[position] = value
                vec = tuple(vec)
                if any(vec) and vec != tuple(x):
                    found.append(vec)
        found.sort(key=lambda v: (sum(v), v))
        return found

    def _split(self, x: Vector) -> List[Vector]:
        if x in self._canon_memo:
            return self._canon_memo[x]
        result = None
        if sum(x) > 1:
            for beta in self._split_candidates(x):
                rest = tuple(c - b for b, c in zip(beta, x))
                if self.ext_positive(beta, rest) or self.ext_positive(rest, beta):
                    continue
                result = self._split(beta) + self._split(rest)
                break
        if result is None:
            result = [x]
        self._canon_memo[x] = result
        return result

    def canonical_decomposition(self, x: Vector) -> CanonicalDecomposition:
        x = tuple(int(c) for c in x)
        if any(c < 0 for c in x):
            raise ValueError(f"Dimension vector {list(x)} has a negative entry")
        limit = QUIVER_CONFIG["max_schofield_size"]
        if sum(x) > limit:
            raise NotImplementedError(f"Canonical decomposition limited to total dimension {limit}, got {sum(x)}")
        reduced, simples = self.split_simples(x)
        parts = list(simples)
        if any(reduced):
            parts.extend(self._split(reduced))
        counts = Counter(parts)
        summands = sorted(counts.items(), key=lambda item: (sum(item[0]), item[0]))
        return CanonicalDecomposition(summands=summands, kinds={beta: _classify(beta) for beta in counts})

    # reductions preserving existence of an open orbit

    @staticmethod
    def castling_reduce(x: Vector) -> Dict[str, Any]:
        """Chain of reductions ending at a vector no step applies to.

        Steps: drop arms of dimension 0 or equal to the centre, split simple summands,
        reflect at the centre when sum b < 2a, dualize every arm when that enables a reflection.
        """
        a = x[0]
        arms = [b for b in x[1:]]
        steps = []

        def record(op: str) -> None:
            steps.append({"op": op, "vector": [a] + sorted(arms)})

        while True:
            split = [b - a for b in arms if b > a]
            if split:
                arms = [min(b, a) for b in arms]
                record("split-arm-kernels")
            kept = [b for b in arms if 0 < b < a]
            if len(kept) != len(arms):
                arms = kept
                record("drop-trivial-arms")
            total = sum(arms)
            if a > total:
                a = total
                record("split-centre-cokernel")
                continue
            if a == 0 or not arms:
                break
            if total < 2 * a:
                a = total - a
                record("reflect-centre")
                continue
            dual_total = sum(a - b for b in arms)
            if dual_total < 2 * a:
                arms = [a - b for b in arms]
                record("dualize-arms")
                continue
            break
        reduced = tuple([a] + sorted(arms))
        return {"reduced": reduced, "trivial": a == 0 or not arms, "steps": steps}

    def has_open_orbit(self, x: Vector) -> Dict[str, Any]:
        x = tuple(int(c) for c in x)
        chain = self.castling_reduce(x)
        reduced = chain["reduced"]
        result = {"vector": list(x), "reduced": list(reduced), "steps": chain["steps"]}
        if chain["trivial"]:
            return {**result, "open": True, "reason": "reduces-to-simples"}
        q = _form(reduced, reduced)
        if q <= 0:
            return {**result, "open": False, "reason": "dimension-count", "euler_self_pairing": q}
        witness = next((c for _, c in self._candidates(reduced, reduced) if self.is_generic_sub(c, reduced)), None)
        if witness is not None:
            return {**result, "open": False, "reason": "self-extension", "generic_sub": list(witness)}
        # ext vanishes between general representations; isotropic summands still carry a modulus
        decomposition = CanonicalDecomposition(
            summands=sorted(Counter(self._split(reduced)).items(), key=lambda item: (sum(item[0]), item[0])),
        )
        decomposition.kinds = {beta: _classify(beta) for beta, _ in decomposition.summands}
        if decomposition.all_real():
            return {**result, "open": True, "reason": "real-summands", "decomposition": decomposition.to_dict()}
        return {**result, "open": False, "reason": "isotropic-summand", "decomposition": decomposition.to_dict()}


_default = StarQuiver()


def canonical_decomposition(d: int, gamma: Sequence[int]) -> CanonicalDecomposition:
    if len(gamma) != d + 1:
        raise ValueError(f"Dimension vector must have {d + 1} entries for {d} arms, got {len(gamma)}")
    return _default.canonical_decomposition(tuple(gamma))


def is_schur_root(gamma: Sequence[int]) -> bool:
    return _default.is_schur_root(tuple(gamma))


def generic_ext(alpha: Sequence[int], beta: Sequence[int]) -> int:
    return _default.generic_ext(tuple(alpha), tuple(beta))


def generic_hom(alpha: Sequence[int], beta: Sequence[int]) -> int:
    return _default.generic_hom(tuple(alpha), tuple(beta))


def generic_subvectors(gamma: Sequence[int]) -> List[Vector]:
    return _default.generic_subvectors(tuple(gamma))


def castling_reduce(gamma: Sequence[int]) -> Dict[str, Any]:
    return StarQuiver.castling_reduce(tuple(gamma))


def dimension_count_obstruction(gamma: Sequence[int]) -> bool:
    """<g, g> <= 0 leaves no room for an open orbit."""
    return _form(gamma, gamma) <= 0


def _validate_fundamental(n: int, indices: Sequence[int]) -> None:
    if n < 2:
        raise ValueError(f"SL_n needs n >= 2, got {n}")
    for i in indices:
        if not 1 <= i <= n - 1:
            raise ValueError(f"Fundamental index {i} out of range 1..{n - 1}")


def sln_fund_certificate(n: int, indices: Sequence[int]) -> Dict[str, Any]:
    _validate_fundamental(n, indices)
    return _default.has_open_orbit(tuple([n] + list(indices)))


def is_primitive_sln_fund(n: int, indices: Sequence[int]) -> bool:
    """(w_{i_1}, ..., w_{i_d}) for SL_n is primitive iff the star vector (n, i_1, ..., i_d) has an open orbit."""
    return bool(sln_fund_certificate(n, indices)["open"])


# randomized exact oracle

def tangent_matrix(gamma: Sequence[int], maps: List[np.ndarray]) -> np.ndarray:
    """Matrix of (g_0, g_1..g_d) -> (g_0 M_k - M_k g_k)_k."""
    a = gamma[0]
    arms = list(gamma[1:])
    col_offsets = [a * a]
    for b in arms:
        col_offsets.append(col_offsets[-1] + b * b)
    n_cols = col_offsets[-1]
    n_rows = a * sum(arms)
    T = np.zeros((n_rows, n_cols), dtype=np.int64)
    row = 0
    for k, (b, M) in enumerate(zip(arms, maps)):
        start = col_offsets[k]
        for r in range(a):
            for c in range(b):
                for j in range(a):
                    T[row, r * a + j] += M[j, c]
                for j in range(b):
                    T[row, start + j * b + c] -= M[r, j]
                row += 1
    return T


def _oracle_sample(args: Tuple[Tuple[int, ...], np.random.SeedSequence, int, int]) -> Dict[str, Any]:
    gamma, seed_seq, entry_range, prime = args
    rng = np.random.default_rng(seed_seq)
    a = gamma[0]
    maps = [rng.integers(-entry_range, entry_range + 1, size=(a, b)) for b in gamma[1:]]
    rank = modular_rank(tangent_matrix(gamma, maps), prime) if maps and a else 0
    return {"rank": rank, "digest": digest(*maps) if maps else ""}


def open_orbit_oracle(d: int, gamma: Sequence[int], samples: int = 20, seed: int = 42,
                      workers: int = 1) -> Dict[str, Any]:
    """Open iff some sample reaches orbit dimension dim Rep; 'open' is certain, the converse probable."""
    gamma = tuple(int(c) for c in gamma)
    if len(gamma) != d + 1:
        raise ValueError(f"Dimension vector must have {d + 1} entries for {d} arms")
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    dim_rep = gamma[0] * sum(gamma[1:])
    entry_range = QUIVER_CONFIG["entry_range"]
    prime = QUIVER_CONFIG["prime"]
    seeds = np.random.SeedSequence(seed).spawn(samples)
    jobs = [(gamma, s, entry_range, prime) for s in seeds]

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_oracle_sample, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_oracle_sample(job))
            if results[-1]["rank"] == dim_rep:
                break

    best = max(r["rank"] for r in results)
    for index, r in enumerate(results):
        if r["rank"] == dim_rep:
            logger.debug("quiver oracle: %s open at sample %d", gamma, index)
            return {"status": "open", "samples_used": index + 1, "witness_sample": index,
                    "witness_digest": r["digest"], "seed": seed, "dim_rep": dim_rep, "orbit_dim": dim_rep}
    return {"status": "probably_not_open", "samples_used": len(results), "seed": seed,
            "dim_rep": dim_rep, "orbit_dim": best}
