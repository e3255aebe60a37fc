import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import gcd
from typing import Dict, List, Any, Optional, Sequence, Tuple

from config.settings import RUN_CONFIG, PRIM_CONFIG
from src.rootsys import RootSystem, Weight, build_root_system, validate_weight, dual_weight, support
from src.chars import CharacterEngine, default_engine
from src.cones import cone_dimension, cone_member, interiors_intersect, ray_in_cone, zero_in_interior_conv
from src.tables import TableRegistry
from src.sep import sep_bounds, sep_index
from src.quiver import sln_fund_certificate, is_primitive_sln_fund
from src.flagorbit import open_orbit_flags

logger = logging.getLogger(__name__)

MODES = ("primitive", "primitive_at_mu", "invariant_free", "stable")


@dataclass
class TupleQuery:
    """A tuple of dominant weights and the property asked about it."""
    type: str
    weights: List[Weight]
    mode: str = "primitive"
    mu: Optional[Weight] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"Unknown query mode '{self.mode}', expected one of {', '.join(MODES)}")
        self.type = str(self.type)
        R = self.root_system()
        if not self.weights:
            raise ValueError("A query needs at least one weight")
        self.weights = [validate_weight(R, w) for w in self.weights]
        if any(not any(w) for w in self.weights):
            raise ValueError("Weights must be nonzero")
        if self.mu is not None:
            self.mu = validate_weight(R, self.mu)

    def root_system(self) -> RootSystem:
        return build_root_system(self.type)


@dataclass
class Verdict:
    status: str
    mode: str
    type: str
    weights: List[Weight]
    certificate: Dict[str, Any] = field(default_factory=dict)
    mu: Optional[Weight] = None

    @property
    def decided(self) -> bool:
        return self.status in ("Yes", "No")

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "status": self.status,
            "mode": self.mode,
            "type": self.type,
            "weights": [list(w) for w in self.weights],
            "certificate": self.certificate,
        }
        if self.mu is not None:
            payload["mu"] = list(self.mu)
        return payload


def _apply_automorphism(weight: Weight, automorphism: Sequence[int]) -> Weight:
    image = [0] * len(weight)
    for j, c in enumerate(weight):
        image[automorphism[j] - 1] = c
    return tuple(image)


def canonical_form(R: RootSystem, weights: Sequence[Weight], mu: Optional[Weight] = None
                   ) -> Tuple[List[Weight], Optional[Weight], Tuple[int, ...]]:
    """Least sorted image of the tuple over diagram automorphisms (applied to mu as well)."""
    best = None
    for automorphism in R.diagram_automorphisms():
        image = sorted(_apply_automorphism(w, automorphism) for w in weights)
        image_mu = None if mu is None else _apply_automorphism(mu, automorphism)
        key = (image, image_mu or ())
        if best is None or key < best[0]:
            best = (key, image, image_mu, automorphism)
    return best[1], best[2], tuple(best[3])


def fundamental_index(weight: Weight) -> Optional[int]:
    """1-based node i if weight is a multiple of w_i."""
    s = support(weight)
    return next(iter(s)) if len(s) == 1 else None


def _is_first_pair(R: RootSystem, weights: Sequence[Weight]) -> bool:
    """(w_1, w_1) up to diagram automorphism, in the types where E_{m w_1} (x) E_{n w_1} is multiplicity free."""
    t = R.simple_type
    if len(weights) != 2 or not (t.family in ("A", "B", "C", "D") or str(t) == "E6"):
        return False
    first = tuple(1 if j == 0 else 0 for j in range(R.rank))
    images = {_apply_automorphism(first, a) for a in R.diagram_automorphisms()}
    return weights[0] == weights[1] and tuple(weights[0]) in images


def _primitive_part(weight: Weight) -> Weight:
    g = gcd(*weight)
    return tuple(c // g for c in weight)


def _shells(d: int, total: int):
    """Vectors in Z_{>=0}^d with coordinate sum total, lexicographically ascending."""
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _shells(d - 1, total - first):
            yield (first,) + rest


class PrimitivityChecker:
    """Three-valued primitivity, invariant-freeness and stability verdicts with certificates."""

    def __init__(self, engine: Optional[CharacterEngine] = None, search_bound: Optional[int] = None,
                 samples: Optional[int] = None, seed: Optional[int] = None, workers: Optional[int] = None,
                 registry: Optional[TableRegistry] = None):
        self.engine = engine or default_engine()
        self.search_bound = search_bound or RUN_CONFIG["search_bound"]
        self.samples = samples or RUN_CONFIG["sample_count"]
        self.seed = RUN_CONFIG["seed"] if seed is None else seed
        self.workers = workers or RUN_CONFIG["workers"]
        self.registry = registry or TableRegistry()

    # witness search

    def _reachable(self, R: RootSystem, total: Sequence[int], mu: Weight) -> bool:
        """c^mu can be nonzero only if total - mu is a nonnegative integer root combination."""
        coords = R.weight_to_root([t - m for t, m in zip(total, mu)])
        return all(c.denominator == 1 and c >= 0 for c in coords)

    def witness_search(self, R: RootSystem, weights: Sequence[Weight], threshold: int,
                       bound: int, mu: Optional[Weight] = None) -> Optional[Dict[str, Any]]:
        """First n (by shell, then lexicographically) with c^mu at (n_s weights_s) >= threshold."""
        mu = tuple([0] * R.rank) if mu is None else tuple(mu)
        d = len(weights)
        for shell in range(1, bound + 1):
            logger.info("witness search %s: shell %d", R.simple_type, shell)
            for n in _shells(d, shell):
                total = [sum(k * w[j] for k, w in zip(n, weights)) for j in range(R.rank)]
                if not self._reachable(R, total, mu):
                    continue
                value = self.engine.tensor_power_invariants(R, weights, n, mu)
                if value >= threshold:
                    return {"kind": "lr-witness", "weights": [list(w) for w in weights], "n": list(n),
                            "mu": list(mu), "value": value, "threshold": threshold}
        return None

    # shared screens

    def _length_bound(self, R: RootSystem, d: int) -> Optional[Dict[str, Any]]:
        bounds = sep_bounds(R)
        if d >= bounds["upper"] + 2:
            return {"kind": "length-bound", "d": d, "sep_upper": bounds["upper"], "source": bounds["source"]}
        return None

    def _dimension_audit(self, R: RootSystem, weights: Sequence[Weight]) -> Optional[Dict[str, Any]]:
        """Fundamental multiples whose flag varieties outgrow G cannot be primitive."""
        if any(fundamental_index(w) is None for w in weights):
            return None
        codims = [R.parabolic_codim(support(w)) for w in weights]
        if sum(codims) > R.dim_g:
            return {"kind": "dimension-audit", "codims": codims, "dim_g": R.dim_g}
        return None

    def _with_witness(self, R: RootSystem, certificate: Dict[str, Any], weights: Sequence[Weight],
                      threshold: int, bound: Optional[int] = None) -> Dict[str, Any]:
        witness = self.witness_search(R, weights, threshold, bound or self.search_bound)
        if witness is not None:
            certificate = {**certificate, "witness": witness}
        return certificate

    def _verdict(self, q: TupleQuery, status: str, certificate: Dict[str, Any]) -> Verdict:
        logger.debug("%s %s: %s via %s", q.mode, q.type, status, certificate.get("kind"))
        return Verdict(status=status, mode=q.mode, type=q.type, weights=list(q.weights),
                       certificate=certificate, mu=q.mu)

    # primitivity

    def _primitive_pipeline(self, R: RootSystem, weights: List[Weight]) -> Tuple[str, Dict[str, Any]]:
        d = len(weights)
        base = {"canonical_weights": [list(w) for w in weights]}
        if d <= 2:
            return "Yes", {**base, "kind": "pair-rule", "d": d}

        length = self._length_bound(R, d)
        if length is not None:
            return "No", self._with_witness(R, {**base, **length}, weights, 2)

        indices = [fundamental_index(w) for w in weights]
        if indices[0] is not None and all(i == indices[0] for i in indices):
            rule = self.registry.fundamental_rule(R, d, indices[0])
            certificate = {**base, "kind": "table-rule", "table": "fundamental", "rule": rule["rule"],
                           "d": d, "node": indices[0]}
            if rule["primitive"]:
                return "Yes", certificate
            return "No", self._with_witness(R, certificate, weights, 2)

        if R.simple_type.family == "A" and all(i is not None for i in indices):
            n = R.rank + 1
            try:
                result = sln_fund_certificate(n, sorted(indices))
            except NotImplementedError as e:
                logger.info("quiver step skipped: %s", e)
            else:
                certificate = {**base, "kind": "quiver", "n": n, "indices": sorted(indices),
                               "reason": result["reason"], "saturated": any(max(w) > 1 for w in weights)}
                if result["open"]:
                    return "Yes", certificate
                return "No", self._with_witness(R, certificate, [tuple(1 if j == i - 1 else 0 for j in range(R.rank))
                                                                 for i in indices], 2)

        if d == 3:
            match = self.registry.match_triple(R, [support(w) for w in weights])
            if match is not None:
                return "Yes", {**base, "kind": "table-rule", "table": "triples", **match}

        audit = self._dimension_audit(R, weights)
        if audit is not None:
            return "No", self._with_witness(R, {**base, **audit}, weights, 2)

        if R.simple_type.family in ("A", "B", "C", "D"):
            orbit = open_orbit_flags(R, [sorted(support(w)) for w in weights], samples=self.samples,
                                     seed=self.seed, workers=self.workers)
            if orbit["status"] == "open":
                return "Yes", {**base, "kind": "open-orbit", "supports": orbit["supports"], "seed": orbit["seed"],
                               "samples": self.samples, "witness_sample": orbit["witness_sample"],
                               "witness_digest": orbit["witness_digest"]}

        # saturation: fundamental multiples share the verdict of the fundamental tuple
        searched = weights
        if all(i is not None for i in indices):
            searched = [tuple(1 if j == i - 1 else 0 for j in range(R.rank)) for i in indices]
        witness = self.witness_search(R, searched, 2, self.search_bound)
        if witness is not None:
            return "No", {**base, **witness, "saturated": searched != weights}
        return "Unknown", {**base, "kind": "none", "search_bound": self.search_bound}

    def check_primitive(self, q: TupleQuery, search_bound: Optional[int] = None) -> Verdict:
        if q.mode != "primitive":
            raise ValueError(f"check_primitive expects a primitive query, got '{q.mode}'")
        R = q.root_system()
        previous = self.search_bound
        self.search_bound = search_bound or self.search_bound
        try:
            weights, _, automorphism = canonical_form(R, q.weights)
            status, certificate = self._primitive_pipeline(R, weights)
        finally:
            self.search_bound = previous
        certificate["automorphism"] = list(automorphism)
        return self._verdict(q, status, certificate)

    def check_primitive_at(self, q: TupleQuery, mu: Optional[Weight] = None,
                           search_bound: Optional[int] = None) -> Verdict:
        R = q.root_system()
        mu = validate_weight(R, mu if mu is not None else (q.mu or [0] * R.rank))
        q = TupleQuery(type=q.type, weights=q.weights, mode="primitive_at_mu", mu=mu)
        if not any(mu):
            inner = self.check_primitive(TupleQuery(type=q.type, weights=q.weights), search_bound)
            return self._verdict(q, inner.status, inner.certificate)

        bound = search_bound or self.search_bound
        weights, image_mu, automorphism = canonical_form(R, q.weights, mu)
        base = {"canonical_weights": [list(w) for w in weights], "canonical_mu": list(image_mu),
                "automorphism": list(automorphism)}
        if len(weights) == 1:
            return self._verdict(q, "Yes", {**base, "kind": "single-factor"})

        if _is_first_pair(R, weights):
            return self._verdict(q, "Yes", {**base, "kind": "multiplicity-free-pair"})

        witness = self.witness_search(R, weights, 2, bound, image_mu)
        if witness is not None:
            return self._verdict(q, "No", {**base, **witness})

        # c^mu at n equals c^0 of (mu*, n weights), a slice of the extended tuple
        extended = [dual_weight(R, image_mu)] + list(weights)
        inner = self.check_primitive(TupleQuery(type=q.type, weights=extended), bound)
        if inner.status == "Yes":
            return self._verdict(q, "Yes", {**base, "kind": "reduction",
                                            "tuple": [list(w) for w in extended], "inner": inner.certificate})
        return self._verdict(q, "Unknown", {**base, "kind": "none", "search_bound": bound})

    # invariant-freeness

    def check_invariant_free(self, q: TupleQuery, search_bound: Optional[int] = None) -> Verdict:
        if q.mode != "invariant_free":
            raise ValueError(f"check_invariant_free expects an invariant_free query, got '{q.mode}'")
        R = q.root_system()
        bound = search_bound or self.search_bound
        weights, _, automorphism = canonical_form(R, q.weights)
        base = {"canonical_weights": [list(w) for w in weights], "automorphism": list(automorphism)}
        d = len(weights)
        normalized = [_primitive_part(w) for w in weights]

        if d == 1:
            return self._verdict(q, "Yes", {**base, "kind": "single-factor"})
        if d > R.rank:
            certificate = self._with_witness(R, {**base, "kind": "rank-bound", "d": d, "rank": R.rank},
                                             normalized, 1, bound)
            return self._verdict(q, "No", certificate)
        for i in range(d):
            others = weights[:i] + weights[i + 1:]
            if ray_in_cone(dual_weight(R, weights[i]), others):
                certificate = self._with_witness(R, {**base, "kind": "cone-condition", "index": i + 1},
                                                 normalized, 1, bound)
                return self._verdict(q, "No", certificate)
        if d == 2:
            # the cone screen already rejects Q w_1 = Q w_2^*
            return self._verdict(q, "Yes", {**base, "kind": "pair-rule", "d": 2})

        witness = self.witness_search(R, normalized, 1, bound)
        if witness is not None:
            return self._verdict(q, "No", {**base, **witness})
        return self._verdict(q, "Unknown", {**base, "kind": "none", "search_bound": bound,
                                            "screens": ["rank-bound", "cone-condition"]})

    # stability

    def gamma_generators(self, R: RootSystem, d: int) -> List[List[Weight]]:
        """Members of Gamma(G, d) from factors of bounded height: an inner approximation."""
        height = PRIM_CONFIG["gamma_height_bound"]
        limit = PRIM_CONFIG["gamma_max_tuples"]
        small = [w for total in range(height + 1) for w in sorted(_shells(R.rank, total))]
        members = []
        heads = [[]]
        for _ in range(d - 1):
            heads = [h + [w] for h in heads for w in small]
            heads = heads[:limit]
        for head in heads:
            product = self.engine.tensor_multiple(R, head) if any(any(w) for w in head) else None
            if product is None:
                members.append(head + [tuple([0] * R.rank)])
                continue
            for nu in sorted(product.entries):
                members.append(head + [dual_weight(R, nu)])
        return members

    def check_stable(self, q: TupleQuery) -> Verdict:
        if q.mode != "stable":
            raise ValueError(f"check_stable expects a stable query, got '{q.mode}'")
        R = q.root_system()
        r = R.rank
        weights = list(q.weights)
        d = len(weights)
        base = {"weights": [list(w) for w in weights]}

        bounds = sep_bounds(R)
        if d >= bounds["upper"]:
            return self._verdict(q, "Yes", {**base, "kind": "separation-index", "d": d,
                                            "sep_upper": bounds["upper"], "source": bounds["source"]})

        for i in range(d):
            others = weights[:i] + weights[i + 1:]
            if others and cone_dimension(others) == r and cone_member(others, dual_weight(R, weights[i]), strict=True):
                return self._verdict(q, "Yes", {**base, "kind": "dual-in-interior", "index": i + 1})

        for size in range(1, d):
            for part in combinations(range(d), size):
                if 0 not in part:
                    continue
                rest = [j for j in range(d) if j not in part]
                first = [weights[j] for j in part]
                second = [dual_weight(R, weights[j]) for j in rest]
                if cone_dimension(first) == r and cone_dimension(second) == r and interiors_intersect(first, second):
                    return self._verdict(q, "Yes", {**base, "kind": "split-cones",
                                                    "first": [j + 1 for j in part], "second": [j + 1 for j in rest]})

        gamma = self._gamma_condition(R, weights)
        if gamma is not None:
            return self._verdict(q, "Yes", {**base, **gamma})
        return self._verdict(q, "Unknown", {**base, "kind": "none"})

    @staticmethod
    def _block_vector(R: RootSystem, d: int, index: int, weight: Weight) -> Tuple[int, ...]:
        v = [0] * (R.rank * d)
        v[index * R.rank:(index + 1) * R.rank] = list(weight)
        return tuple(v)

    def _gamma_condition(self, R: RootSystem, weights: List[Weight]) -> Optional[Dict[str, Any]]:
        """Interior of cone(Gamma(G, d)) meets the interior of the block cone of the tuple."""
        d = len(weights)
        if d == 2:
            # Gamma(G, 2) = {(m, m^*)}: relative interiors meet iff w_1 is regular and Q w_2 = Q w_1^*
            a, b = weights[0], dual_weight(R, weights[1])
            regular = all(c > 0 for c in a)
            proportional = all(x * b[0] == y * a[0] for x, y in zip(a, b))
            if regular and proportional:
                return {"kind": "gamma-cone", "exact": True}
            return None
        if d < 3:
            return None
        members = self.gamma_generators(R, d)
        generators = [tuple(c for w in m for c in w) for m in members]
        generators = [g for g in generators if any(g)]
        if not generators or cone_dimension(generators) < R.rank * d:
            return None
        blocks = [self._block_vector(R, d, i, w) for i, w in enumerate(weights)]
        if interiors_intersect(generators, blocks):
            return {"kind": "gamma-cone", "exact": False, "generators": len(generators)}
        return None

    def stable_witness_point(self, q: TupleQuery) -> Dict[str, Any]:
        """Weyl elements w_i with 0 in the interior of conv{w_i weights_i}, from a separating sequence."""
        R = q.root_system()
        d = len(q.weights)
        try:
            result = sep_index(R, RUN_CONFIG["time_budget_ms"], workers=self.workers)
        except NotImplementedError as e:
            return {"status": "not_applicable", "reason": str(e)}
        if result["status"] != "exact" and "certificate" not in result:
            return {"status": "not_applicable", "reason": "no separating sequence available"}
        chambers = result["certificate"]["chambers"]
        if len(chambers) > d:
            return {"status": "not_applicable", "reason": f"separating sequence has {len(chambers)} chambers, tuple has {d}"}
        words = [chambers[i] if i < len(chambers) else chambers[0] for i in range(d)]
        elements = [R.weyl_element(k - 1 for k in word) for word in words]
        points = [e.apply(w) for e, w in zip(elements, q.weights)]
        if not zero_in_interior_conv(points, full_dimensional=True):
            raise ArithmeticError(f"Separating sequence for {R.simple_type} failed the closed-orbit check")
        return {"status": "success", "elements": words, "points": [list(p) for p in points]}

    # prim(G)

    def prim_lower_bounds(self, R: RootSystem) -> Dict[str, Any]:
        t = R.simple_type
        lower = self.registry.equal_index_length(R)
        upper_weyl = R.weyl_group_order() + 1
        upper = min(upper_weyl, sep_bounds(R)["upper"] + 1)
        if lower > upper:
            raise ArithmeticError(f"prim({t}) lower bound {lower} exceeds upper bound {upper}")
        return {"type": str(t), "lower": lower, "upper": upper, "upper_weyl": upper_weyl, "exact": lower == upper}

    # certificate replay

    def replay_certificate(self, verdict: Verdict) -> bool:
        """Re-check a Yes/No certificate with a fresh character engine and fresh table data."""
        if not verdict.decided:
            return False
        R = build_root_system(verdict.type)
        certificate = verdict.certificate
        engine = CharacterEngine()
        registry = TableRegistry()
        witness = certificate.get("witness")
        if witness is not None and not self._replay_witness(R, witness, engine):
            return False

        kind = certificate.get("kind")
        weights = [tuple(w) for w in certificate.get("canonical_weights", verdict.weights)]
        d = len(weights)
        if kind == "lr-witness":
            return self._replay_witness(R, certificate, engine)
        if kind in ("pair-rule", "single-factor"):
            if verdict.mode == "invariant_free" and d == 2:
                return not ray_in_cone(dual_weight(R, weights[0]), [weights[1]])
            return d <= 2 if verdict.mode != "invariant_free" else d == 1
        if kind == "multiplicity-free-pair":
            return _is_first_pair(R, weights)
        if kind == "length-bound":
            return d >= sep_bounds(R)["upper"] + 2
        if kind == "table-rule" and certificate["table"] == "fundamental":
            rule = registry.fundamental_rule(R, d, certificate["node"])
            return rule["rule"] == certificate["rule"] and rule["primitive"] == (verdict.status == "Yes")
        if kind == "table-rule" and certificate["table"] == "triples":
            match = registry.match_triple(R, [support(w) for w in weights])
            return verdict.status == "Yes" and match is not None and match["rule"] == certificate["rule"]
        if kind == "quiver":
            return is_primitive_sln_fund(certificate["n"], certificate["indices"]) == (verdict.status == "Yes")
        if kind == "dimension-audit":
            return sum(R.parabolic_codim(support(w)) for w in weights) > R.dim_g
        if kind == "open-orbit":
            orbit = open_orbit_flags(R, certificate["supports"], samples=certificate["samples"],
                                     seed=certificate["seed"])
            return orbit["status"] == "open" and orbit["witness_sample"] == certificate["witness_sample"]
        if kind == "rank-bound":
            return d > R.rank
        if kind == "cone-condition":
            i = certificate["index"] - 1
            return ray_in_cone(dual_weight(R, weights[i]), weights[:i] + weights[i + 1:])
        if kind == "reduction":
            inner = Verdict(status="Yes", mode="primitive", type=verdict.type,
                            weights=[tuple(w) for w in certificate["tuple"]], certificate=certificate["inner"])
            return self.replay_certificate(inner)
        if kind == "separation-index":
            return len(verdict.weights) >= sep_bounds(R)["upper"]
        if kind in ("dual-in-interior", "split-cones", "gamma-cone"):
            replayed = self.check_stable(TupleQuery(type=verdict.type, weights=verdict.weights, mode="stable"))
            return replayed.status == "Yes"
        logger.warning("No replay rule for certificate kind '%s'", kind)
        return False

    @staticmethod
    def _replay_witness(R: RootSystem, witness: Dict[str, Any], engine: CharacterEngine) -> bool:
        weights = [tuple(w) for w in witness["weights"]]
        value = engine.tensor_power_invariants(R, weights, witness["n"], tuple(witness["mu"]))
        return value == witness["value"] and value >= witness["threshold"]


_default_checker: Optional[PrimitivityChecker] = None


def default_checker() -> PrimitivityChecker:
    global _default_checker
    if _default_checker is None:
        _default_checker = PrimitivityChecker()
    return _default_checker


def check_primitive(q: TupleQuery, search_bound: Optional[int] = None) -> Verdict:
    return default_checker().check_primitive(q, search_bound)


def check_primitive_at(q: TupleQuery, mu: Weight, search_bound: Optional[int] = None) -> Verdict:
    return default_checker().check_primitive_at(q, mu, search_bound)


def check_invariant_free(q: TupleQuery, search_bound: Optional[int] = None) -> Verdict:
    return default_checker().check_invariant_free(q, search_bound)


def check_stable(q: TupleQuery) -> Verdict:
    return default_checker().check_stable(q)


def stable_witness_point(q: TupleQuery) -> Dict[str, Any]:
    return default_checker().stable_witness_point(q)


def prim_lower_bounds(R: RootSystem) -> Dict[str, Any]:
    return default_checker().prim_lower_bounds(R)


def replay_certificate(verdict: Verdict) -> bool:
    return default_checker().replay_certificate(verdict)
