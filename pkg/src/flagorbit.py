import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Tuple, Any, Sequence

import numpy as np

from config.settings import FLAGS_CONFIG, QUIVER_CONFIG
from src.rootsys import RootSystem, support
from utils.helpers import modular_matmul, modular_rank, digest

logger = logging.getLogger(__name__)


class ClassicalRealization:
    """sl_N, so_N or sp_N with the antidiagonal form sum_i s_i E_{i, N+1-i}.

    Node j of the Dynkin diagram is the stabilizer of the isotropic flag span(e_1..e_j);
    in type D node l-1 uses span(e_1..e_{l-1}, e_{l+1}) instead.
    """

    def __init__(self, R: RootSystem):
        t = R.simple_type
        if t.family not in FLAGS_CONFIG["supported_families"]:
            raise NotImplementedError(f"No matrix realization for exceptional type {t}")
        self.R = R
        self.family = t.family
        self.rank = t.rank
        l = t.rank
        self.size = {"A": l + 1, "B": 2 * l + 1, "C": 2 * l, "D": 2 * l}[t.family]
        N = self.size
        if self.family == "C":
            self.signs = [1 if i < l else -1 for i in range(N)]
        else:
            self.signs = [1] * N
        self.basis = self._basis()
        if len(self.basis) != R.dim_g:
            raise ArithmeticError(f"Realization of {t} has dimension {len(self.basis)}, expected {R.dim_g}")

    def _mirror(self, i: int) -> int:
        return self.size - 1 - i

    def _basis(self) -> List[np.ndarray]:
        N = self.size
        basis = []
        if self.family == "A":
            for i in range(N):
                for j in range(N):
                    if i != j:
                        m = np.zeros((N, N), dtype=np.int64)
                        m[i, j] = 1
                        basis.append(m)
            for i in range(N - 1):
                m = np.zeros((N, N), dtype=np.int64)
                m[i, i], m[i + 1, i + 1] = 1, -1
                basis.append(m)
            return basis

        seen = set()
        s = self.signs
        for i in range(N):
            for j in range(N):
                ip, jp = self._mirror(i), self._mirror(j)
                m = np.zeros((N, N), dtype=np.int64)
                m[i, j] += 1
                m[jp, ip] -= s[i] * s[j]
                if not m.any():
                    continue
                if j == ip:
                    m = np.zeros((N, N), dtype=np.int64)
                    m[i, j] = 1
                key = tuple(sorted([(i, j), (jp, ip)]))
                if key in seen:
                    continue
                seen.add(key)
                basis.append(m)
        return basis

    def root_vectors(self) -> List[np.ndarray]:
        return [m for m in self.basis if not np.array_equal(np.diag(np.diag(m)), m)]

    def subspaces(self, node: int) -> List[int]:
        """0-based coordinate indices spanning the flag member of a 1-based node."""
        l = self.rank
        if self.family == "D" and node == l - 1:
            return list(range(l - 1)) + [l]
        return list(range(node))

    def parabolic_equations(self, supp: Sequence[int]) -> List[Tuple[int, int]]:
        """Entries (r, c) that must vanish: X maps span(I) into itself for each flag member."""
        entries = set()
        for node in supp:
            inside = set(self.subspaces(node))
            for c in inside:
                for r in range(self.size):
                    if r not in inside:
                        entries.add((r, c))
        return sorted(entries)

    def parabolic_dimension(self, supp: Sequence[int]) -> int:
        equations = self.parabolic_equations(supp)
        if not equations:
            return len(self.basis)
        A = np.array([[m[r, c] for m in self.basis] for r, c in equations], dtype=np.int64)
        return len(self.basis) - modular_rank(A, QUIVER_CONFIG["prime"])

    def lower_root_vectors(self) -> List[np.ndarray]:
        return [m for m in self.root_vectors() if not np.triu(m).any()]

    def random_group_element(self, rng: np.random.Generator,
                             prime: Optional[int] = QUIVER_CONFIG["prime"]) -> Tuple[np.ndarray, np.ndarray]:
        """g in the lower unipotent radical and g^{-1}, one factor exp(tX) per negative root vector.

        Entries are reduced mod prime; prime=None keeps exact Python integers.
        Every parabolic here contains the upper Borel, so g P is a general point of G/P.
        """
        N = self.size
        entry_range = FLAGS_CONFIG["entry_range"]
        dtype = object if prime is None else np.int64
        g = np.eye(N, dtype=np.int64).astype(dtype)
        g_inv = np.eye(N, dtype=np.int64).astype(dtype)
        for X in self.lower_root_vectors():
            X2 = X @ X
            t = 0
            while t == 0:
                t = int(rng.integers(-entry_range, entry_range + 1))
            if X2.any() and t % 2:
                # keeps t^2/2 integral
                t += 1 if t > 0 else -1
            step = (np.eye(N, dtype=np.int64) + t * X + (t * t // 2) * X2).astype(dtype)
            back = (np.eye(N, dtype=np.int64) - t * X + (t * t // 2) * X2).astype(dtype)
            if prime is None:
                g = g @ step
                g_inv = back @ g_inv
            else:
                g = modular_matmul(g, step, prime)
                g_inv = modular_matmul(back, g_inv, prime)
        return g, g_inv

    def conjugate(self, g: np.ndarray, g_inv: np.ndarray, m: np.ndarray,
                  prime: Optional[int] = QUIVER_CONFIG["prime"]) -> np.ndarray:
        """g^{-1} m g, mod prime unless prime is None."""
        if prime is None:
            return g_inv @ m.astype(object) @ g
        return modular_matmul(modular_matmul(g_inv, m, prime), g, prime)


def parabolic_dimension(R: RootSystem, supp: Sequence[int]) -> int:
    return ClassicalRealization(R).parabolic_dimension(supp)


def _flag_sample(args) -> Dict[str, Any]:
    R, supports, seed_seq = args
    realization = ClassicalRealization(R)
    rng = np.random.default_rng(seed_seq)
    rows = []
    elements = []
    for supp in supports:
        g, g_inv = realization.random_group_element(rng)
        elements.append(g)
        conjugated = [realization.conjugate(g, g_inv, m) for m in realization.basis]
        for r, c in realization.parabolic_equations(supp):
            rows.append([int(Y[r, c]) for Y in conjugated])
    if not rows:
        return {"rank": 0, "digest": ""}
    rank = modular_rank(np.array(rows, dtype=np.int64), QUIVER_CONFIG["prime"])
    return {"rank": rank, "digest": digest(*elements)}


def open_orbit_flags(R: RootSystem, supports: Sequence[Sequence[int]], samples: int = 20, seed: int = 42,
                     workers: int = 1) -> Dict[str, Any]:
    """Does G/P_1 x ... x G/P_d have an open G-orbit? 'open' is certain, the converse probable."""
    realization = ClassicalRealization(R)
    supports = [sorted(set(int(n) for n in s)) for s in supports]
    for s in supports:
        if not s:
            raise ValueError("Supports must be nonempty")
        if any(not 1 <= n <= R.rank for n in s):
            raise ValueError(f"Support {s} out of range 1..{R.rank}")
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")

    codims = [R.parabolic_codim(s) for s in supports]
    target = sum(codims)
    base = {"type": str(R.simple_type), "supports": supports, "codims": codims, "dim_g": R.dim_g, "seed": seed}
    if target > R.dim_g:
        return {**base, "status": "probably_not_open", "certain": True, "reason": "dimension-audit",
                "samples_used": 0}

    seeds = np.random.SeedSequence(seed).spawn(samples)
    jobs = [(R, supports, s) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_flag_sample, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_flag_sample(job))
            if results[-1]["rank"] == target:
                break

    for index, r in enumerate(results):
        if r["rank"] == target:
            logger.debug("flag oracle: %s open at sample %d", supports, index)
            return {**base, "status": "open", "certain": True, "samples_used": index + 1,
                    "witness_sample": index, "witness_digest": r["digest"]}
    return {**base, "status": "probably_not_open", "certain": False, "samples_used": len(results),
            "orbit_dim": max(r["rank"] for r in results), "target": target}


def primitivity_bridge(weights: Sequence[Sequence[int]], orbit_verdict: Dict[str, Any]) -> Dict[str, Any]:
    """Evidence for primitivity from an orbit verdict, never stronger than the theory allows.

    An open orbit makes the tuple primitive. Without an open orbit only tuples of
    multiples of fundamental weights are known to be ample, and then a certain
    verdict rules primitivity out.
    """
    fundamental = all(len(support(w)) == 1 for w in weights)
    status = orbit_verdict.get("status")
    if status == "open":
        return {"status": "Yes", "reason": "open-orbit"}
    if fundamental and orbit_verdict.get("certain"):
        return {"status": "No", "reason": "no-open-orbit-fundamental-multiples"}
    if fundamental:
        return {"status": "Unknown", "hint": "probably-not-primitive", "reason": "orbit-oracle-one-sided"}
    return {"status": "Unknown", "reason": "ampleness-unknown"}
