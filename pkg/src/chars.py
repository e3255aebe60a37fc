import hashlib
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Any, Optional, Sequence, Tuple

from src.rootsys import RootSystem, Weight, dual_weight, weyl_orbit, validate_weight

logger = logging.getLogger(__name__)


@dataclass
class WeightMultiset:
    """Decomposition of a module: highest weight -> multiplicity."""
    entries: Dict[Weight, int] = field(default_factory=dict)

    def __post_init__(self):
        self.entries = {tuple(k): int(v) for k, v in self.entries.items() if v != 0}
        if any(v < 0 for v in self.entries.values()):
            raise ValueError("Multiplicities in a decomposition must be positive")

    def get(self, weight: Sequence[int], default: int = 0) -> int:
        return self.entries.get(tuple(weight), default)

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        if isinstance(other, WeightMultiset):
            return self.entries == other.entries
        if isinstance(other, dict):
            return self.entries == {tuple(k): v for k, v in other.items()}
        return NotImplemented

    def items(self):
        return sorted(self.entries.items())

    def total_dimension(self, engine: "CharacterEngine", R: RootSystem) -> int:
        return sum(mult * engine.weyl_dim(R, weight) for weight, mult in self.entries.items())

    def to_json(self) -> List[Dict[str, Any]]:
        return [{"weight": list(weight), "mult": mult} for weight, mult in self.items()]


@dataclass
class CharacterTable:
    """Dominant weights of E_lambda with multiplicities; W-invariance implied."""
    highest: Weight
    dominant: Dict[Weight, int]

    def expanded(self, R: RootSystem, limit: Optional[int] = None) -> Dict[tuple, int]:
        weights: Dict[tuple, int] = {}
        for weight, mult in self.dominant.items():
            for image in weyl_orbit(R, weight, limit=limit):
                weights[image] = mult
        return weights

    def dimension(self, R: RootSystem) -> int:
        return sum(mult * len(weyl_orbit(R, weight)) for weight, mult in self.dominant.items())


class CharacterEngine:
    """Tensor-product decomposition with an optional on-disk character cache."""

    def __init__(self, cache_dir: Optional[str] = None, cache_enabled: bool = False,
                 use_e6_fastpath: bool = True, max_orbit_size: int = 2000000):
        self.cache_enabled = bool(cache_enabled and cache_dir)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.use_e6_fastpath = use_e6_fastpath
        self.max_orbit_size = max_orbit_size
        self._tables: Dict[Tuple[str, Weight], CharacterTable] = {}
        self._expanded: Dict[Tuple[str, Weight], Dict[tuple, int]] = {}
        self._products: Dict[Tuple[str, Weight, Weight], WeightMultiset] = {}
        self.cache_hits = 0
        self.cache_misses = 0

        if self.cache_enabled:
            self.cache_dir.mkdir(parents=True, exist_ok=True)

    # cache

    def _cache_path(self, R: RootSystem, weight: Weight) -> Path:
        key = f"{R.simple_type}:{','.join(str(c) for c in weight)}"
        digest = hashlib.sha256(key.encode("utf-8")).hexdigest()
        return self.cache_dir / f"char_{digest}.json"

    def _load_cached(self, R: RootSystem, weight: Weight) -> Optional[CharacterTable]:
        path = self._cache_path(R, weight)
        if not path.exists():
            return None
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            if data.get("type") != str(R.simple_type) or tuple(data.get("highest", [])) != weight:
                return None
            dominant = {tuple(entry["weight"]): int(entry["mult"]) for entry in data["dominant"]}
            return CharacterTable(highest=weight, dominant=dominant)
        except Exception as e:
            logger.warning("Ignoring unreadable cache file %s: %s", path, e)
            return None

    def _store_cached(self, R: RootSystem, table: CharacterTable) -> None:
        payload = {
            "type": str(R.simple_type),
            "highest": list(table.highest),
            "dominant": [{"weight": list(w), "mult": m} for w, m in sorted(table.dominant.items())],
        }
        try:
            self._cache_path(R, table.highest).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
        except OSError as e:
            logger.warning("Could not write character cache: %s", e)

    # dimension and multiplicities

    def weyl_dim(self, R: RootSystem, weight: Sequence[int]) -> int:
        """Weyl dimension formula over the positive roots."""
        weight = validate_weight(R, weight)
        shifted = tuple(c + 1 for c in weight)
        numerator = Fraction(1)
        for beta in R.positive_roots:
            top = sum(beta[j] * shifted[j] * R.half_norms[j] for j in range(R.rank))
            bottom = sum(beta[j] * R.half_norms[j] for j in range(R.rank))
            numerator *= Fraction(top) / bottom
        if numerator.denominator != 1:
            raise ArithmeticError(f"Non-integral Weyl dimension for {list(weight)}")
        return int(numerator)

    def _dominant_weights_below(self, R: RootSystem, weight: Weight) -> List[Weight]:
        root_weights = [R.root_to_weight(beta) for beta in R.positive_roots]
        found = {weight}
        frontier = [weight]
        while frontier:
            next_frontier = []
            for mu in frontier:
                for beta in root_weights:
                    nu = tuple(mu[j] - beta[j] for j in range(R.rank))
                    if all(c >= 0 for c in nu) and nu not in found:
                        found.add(nu)
                        next_frontier.append(nu)
            frontier = next_frontier

        def depth(mu: Weight) -> Fraction:
            diff = tuple(weight[j] - mu[j] for j in range(R.rank))
            return sum(R.weight_to_root(diff))

        return sorted(found, key=lambda mu: (depth(mu), tuple(-c for c in mu)))

    def freudenthal(self, R: RootSystem, weight: Sequence[int]) -> CharacterTable:
        """Freudenthal recursion on dominant weights."""
        weight = validate_weight(R, weight)
        key = (str(R.simple_type), weight)
        if key in self._tables:
            return self._tables[key]

        if self.cache_enabled:
            cached = self._load_cached(R, weight)
            if cached is not None:
                self.cache_hits += 1
                self._tables[key] = cached
                return cached
            self.cache_misses += 1

        dominant = self._dominant_weights_below(R, weight)
        members = set(dominant)
        root_weights = [R.root_to_weight(beta) for beta in R.positive_roots]
        rho = R.rho
        top = tuple(c + 1 for c in weight)
        top_norm = R.scaled_inner_product(top, top)

        mult: Dict[Weight, int] = {weight: 1}
        for mu in dominant[1:]:
            total = 0
            for beta in root_weights:
                k = 1
                while True:
                    nu = tuple(mu[j] + k * beta[j] for j in range(R.rank))
                    rep = R.dominant_representative(nu)
                    if rep not in members:
                        break
                    total += mult.get(rep, 0) * R.scaled_inner_product(nu, beta)
                    k += 1
            shifted = tuple(mu[j] + rho[j] for j in range(R.rank))
            denominator = top_norm - R.scaled_inner_product(shifted, shifted)
            value = Fraction(2 * total, denominator)
            if value.denominator != 1 or value < 0:
                raise ArithmeticError(f"Freudenthal produced {value} at {list(mu)} for {list(weight)}")
            if value:
                mult[mu] = int(value)

        table = CharacterTable(highest=weight, dominant=mult)
        self._tables[key] = table
        if self.cache_enabled:
            self._store_cached(R, table)
        return table

    def all_weights(self, R: RootSystem, weight: Sequence[int]) -> Dict[tuple, int]:
        weight = validate_weight(R, weight)
        key = (str(R.simple_type), weight)
        if key not in self._expanded:
            self._expanded[key] = self.freudenthal(R, weight).expanded(R, limit=self.max_orbit_size)
        return self._expanded[key]

    # tensor products

    def _factor_order(self, R: RootSystem, weight: Weight) -> tuple:
        return (self.weyl_dim(R, weight), sum(weight), weight)

    def tensor_decompose(self, R: RootSystem, lam: Sequence[int], mu: Sequence[int]) -> WeightMultiset:
        """Klimyk decomposition of E_lam (x) E_mu over the smaller character."""
        lam = validate_weight(R, lam)
        mu = validate_weight(R, mu)
        small, big = sorted((lam, mu), key=lambda w: self._factor_order(R, w))
        key = (str(R.simple_type), small, big)
        if key in self._products:
            return self._products[key]

        result: Counter = Counter()
        for nu, m in self.all_weights(R, small).items():
            shifted = tuple(big[j] + nu[j] + 1 for j in range(R.rank))
            dominant, sign, _ = R.to_dominant(shifted)
            if any(c == 0 for c in dominant):
                continue
            result[tuple(c - 1 for c in dominant)] += sign * m

        if any(v < 0 for v in result.values()):
            raise ArithmeticError(f"Negative multiplicity in {list(lam)} x {list(mu)}")
        decomposition = WeightMultiset({w: v for w, v in result.items() if v})
        self._products[key] = decomposition
        return decomposition

    def decompose_by_characters(self, R: RootSystem, lam: Sequence[int], mu: Sequence[int]) -> WeightMultiset:
        """Multiply full characters and peel off highest weights."""
        lam = validate_weight(R, lam)
        mu = validate_weight(R, mu)
        product: Counter = Counter()
        left = self.all_weights(R, lam)
        right = self.all_weights(R, mu)
        for a, ma in left.items():
            for b, mb in right.items():
                product[tuple(a[j] + b[j] for j in range(R.rank))] += ma * mb

        def height(v: tuple) -> Fraction:
            return sum(R.weight_to_root(v))

        result: Dict[Weight, int] = {}
        while product:
            candidates = [w for w, c in product.items() if c > 0 and all(x >= 0 for x in w)]
            if not candidates:
                raise ArithmeticError("Character peeling left a non-character remainder")
            top = max(candidates, key=lambda w: (height(w), w))
            count = product[top]
            result[top] = count
            for w, m in self.all_weights(R, top).items():
                product[w] -= count * m
                if product[w] == 0:
                    del product[w]
        return WeightMultiset(result)

    def tensor_multiple(self, R: RootSystem, weights: Sequence[Sequence[int]]) -> WeightMultiset:
        """Full decomposition of a d-fold product, folded in ascending dimension."""
        factors = sorted((validate_weight(R, w) for w in weights), key=lambda w: self._factor_order(R, w))
        if not factors:
            return WeightMultiset({tuple([0] * R.rank): 1})
        current, rest = self._first_pair(R, factors)
        for factor in rest:
            folded: Counter = Counter()
            for nu, m in current.items():
                for kappa, c in self.tensor_decompose(R, nu, factor).entries.items():
                    folded[kappa] += m * c
            current = dict(folded)
        return WeightMultiset(current)

    def _first_pair(self, R: RootSystem, factors: List[Weight]) -> Tuple[Dict[Weight, int], List[Weight]]:
        if len(factors) == 1:
            return {factors[0]: 1}, []
        first, second = factors[0], factors[1]
        fast = self._fastpath(R, first, second)
        if fast is None:
            fast = self.tensor_decompose(R, first, second)
        return dict(fast.entries), factors[2:]

    def _fastpath(self, R: RootSystem, lam: Weight, mu: Weight) -> Optional[WeightMultiset]:
        t = R.simple_type
        if t.family == "A" and t.rank == 1:
            s, u = max(lam[0], mu[0]), min(lam[0], mu[0])
            return clebsch_gordan(s, u)
        if self.use_e6_fastpath and t.family == "E" and t.rank == 6:
            if all(c == 0 for c in lam[1:]) and all(c == 0 for c in mu[1:]):
                return e6_fastpath(lam[0], mu[0])
        return None

    def lr_coefficient(self, R: RootSystem, weights: Sequence[Sequence[int]], mu: Sequence[int]) -> int:
        """Multiplicity of E_mu in the product of the E_weights."""
        mu = validate_weight(R, mu)
        factors = sorted((validate_weight(R, w) for w in weights), key=lambda w: self._factor_order(R, w))
        if not factors:
            return 1 if not any(mu) else 0
        if len(factors) == 1:
            return 1 if factors[0] == mu else 0

        *head, last = factors
        if len(head) == 1:
            current = {head[0]: 1}
        else:
            current = dict(self.tensor_multiple(R, head).entries)

        # c^mu_{X, last} = sum_nu X[nu] * [E_nu in E_mu (x) E_last*]
        if not any(mu):
            return current.get(dual_weight(R, last), 0)
        closing = self.tensor_decompose(R, mu, dual_weight(R, last))
        return sum(m * closing.get(nu) for nu, m in current.items())

    def gamma_member(self, R: RootSystem, weights: Sequence[Sequence[int]]) -> bool:
        """Does the product of the E_weights contain a nonzero invariant?"""
        return self.lr_coefficient(R, weights, tuple([0] * R.rank)) >= 1

    def tensor_power_invariants(self, R: RootSystem, weights: Sequence[Sequence[int]], multiples: Sequence[int],
                                mu: Optional[Sequence[int]] = None) -> int:
        """c^mu at (n_1 weights_1, ..., n_d weights_d); factors with n_s = 0 drop out."""
        if len(multiples) != len(weights):
            raise ValueError(f"Expected {len(weights)} multiples, got {len(multiples)}")
        if any(int(n) < 0 for n in multiples):
            raise ValueError(f"Multiples must be nonnegative, got {list(multiples)}")
        mu = tuple([0] * R.rank) if mu is None else mu
        scaled = [tuple(int(n) * c for c in validate_weight(R, w)) for w, n in zip(weights, multiples) if int(n) > 0]
        return self.lr_coefficient(R, scaled, mu)


def clebsch_gordan(s: int, t: int) -> WeightMultiset:
    """E_s (x) E_t for SL2, s >= t."""
    if s < t:
        s, t = t, s
    return WeightMultiset({(s + t - 2 * i,): 1 for i in range(t + 1)})


def e6_fastpath(s: int, t: int) -> WeightMultiset:
    """E_{s w1} (x) E_{t w1} for E6: summands (a1+a2) w1 + a3 w3 + a4 w6."""
    if s < 0 or t < 0:
        raise ValueError(f"Multiples must be nonnegative, got s={s}, t={t}")
    entries: Dict[Weight, int] = {}
    for a3 in range(min(s, t) + 1):
        for a4 in range(min(s, t) - a3 + 1):
            a1 = s - a3 - a4
            a2 = t - a3 - a4
            weight = (a1 + a2, 0, a3, 0, 0, a4)
            entries[weight] = entries.get(weight, 0) + 1
    return WeightMultiset(entries)


def invariant_dim_e6_system(n1: int, n2: int, n3: int, n4: int) -> int:
    """Count nonnegative solutions of the pairing system for four multiples of w1 in E6."""
    if min(n1, n2, n3, n4) < 0:
        raise ValueError("Multiples must be nonnegative")
    count = 0
    # a3 = b3 = 0 is forced
    for a4 in range(min(n1, n2) + 1):
        a1, a2 = n1 - a4, n2 - a4
        b4 = a1 + a2
        b1, b2 = n3 - b4, n4 - b4
        if b1 < 0 or b2 < 0:
            continue
        if a4 == b1 + b2:
            count += 1
    return count


_default_engine: Optional[CharacterEngine] = None


def default_engine() -> CharacterEngine:
    global _default_engine
    if _default_engine is None:
        _default_engine = CharacterEngine()
    return _default_engine


def weyl_dim(R: RootSystem, weight: Sequence[int]) -> int:
    return default_engine().weyl_dim(R, weight)


def freudenthal(R: RootSystem, weight: Sequence[int]) -> CharacterTable:
    return default_engine().freudenthal(R, weight)


def tensor_decompose(R: RootSystem, lam: Sequence[int], mu: Sequence[int]) -> WeightMultiset:
    return default_engine().tensor_decompose(R, lam, mu)


def lr_coefficient(R: RootSystem, weights: Sequence[Sequence[int]], mu: Sequence[int]) -> int:
    return default_engine().lr_coefficient(R, weights, mu)


def gamma_member(R: RootSystem, d: int, weights: Sequence[Sequence[int]]) -> bool:
    if len(weights) != d:
        raise ValueError(f"Expected {d} weights, got {len(weights)}")
    return default_engine().gamma_member(R, weights)


def tensor_power_invariants(R: RootSystem, weights: Sequence[Sequence[int]], multiples: Sequence[int],
                            mu: Optional[Sequence[int]] = None) -> int:
    return default_engine().tensor_power_invariants(R, weights, multiples, mu)
