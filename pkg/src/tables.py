import importlib
import logging
import re
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from pathlib import Path
from typing import Dict, List, Any, Optional, Sequence, Tuple

import json5
import pandas as pd
import sympy
import yaml

from config.settings import FLAGS_CONFIG
from src.rootsys import RootSystem, build_root_system, bound_data
from src.flagorbit import open_orbit_flags
from src.quiver import is_primitive_sln_fund

logger = logging.getLogger(__name__)

ROOT_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = ROOT_DIR / "data"
TESTS_DIR = ROOT_DIR / "tests"

DEFAULT_RANKS = {"A": range(1, 9), "B": range(3, 9), "C": range(2, 9), "D": range(4, 9)}
EXCEPTIONAL_TYPES = ["E6", "E7", "E8", "F4", "G2"]

_L = sympy.Symbol("l")
_D = sympy.Symbol("d")
_I = sympy.Symbol("i")


@lru_cache(maxsize=None)
def _load(name: str) -> str:
    path = DATA_DIR / f"{name}.json5"
    if not path.exists():
        raise ValueError(f"Unknown data table '{name}' (looked for {path})")
    return path.read_text(encoding="utf-8")


def load_data_table(name: str) -> Dict[str, Any]:
    """Parse data/<name>.json5 (a fresh dict on every call)."""
    return json5.loads(_load(name))


def evaluate_formula(expression, **values) -> sympy.Expr:
    if isinstance(expression, (int, float)):
        return sympy.Integer(int(expression))
    symbols = {"l": _L, "d": _D, "i": _I}
    expr = sympy.sympify(expression, locals=symbols)
    return expr.subs({symbols[k]: v for k, v in values.items()})


def node_index(expression, rank: int) -> int:
    """Resolve a node expression such as '1', 'l' or 'l - 1'."""
    value = evaluate_formula(expression, l=rank)
    if not value.is_integer:
        raise ValueError(f"Node expression '{expression}' is not an integer at rank {rank}")
    return int(value)


def _to_fraction(value: sympy.Expr) -> Fraction:
    return Fraction(str(value))


class TableRegistry:
    """Rule tables and their recomputation reports."""

    def __init__(self):
        self.bounds = load_data_table("bounds")
        self.fundamental = load_data_table("fundamental_rules")
        self.triples = load_data_table("triple_rules")
        self.traceability = load_data_table("traceability")

    # open-orbit length bounds and Levi data

    def _types(self, max_rank: int) -> List[str]:
        names = []
        for family, ranks in DEFAULT_RANKS.items():
            names.extend(f"{family}{r}" for r in ranks if r <= max_rank)
        return names + EXCEPTIONAL_TYPES

    def printed_levi_data(self, R: RootSystem) -> Dict[str, Any]:
        t = R.simple_type
        name = str(t)
        if name in self.bounds["exceptional"]:
            entry = self.bounds["exceptional"][name]
            return {
                "bound": int(entry["bound"]),
                "argmax": sorted(int(n) for n in entry["argmax"]),
                "ratio": _to_fraction(evaluate_formula(entry["ratio"])),
                "erratum": None,
            }
        entry = self.bounds["families"][t.family]
        erratum = entry.get("erratum")
        return {
            "bound": int(evaluate_formula(entry["bound"], l=t.rank)),
            "argmax": sorted({node_index(n, t.rank) for n in entry["argmax"]}),
            "ratio": _to_fraction(evaluate_formula(entry["ratio"], l=t.rank)),
            "erratum": None if erratum is None else {
                "ratio": _to_fraction(evaluate_formula(erratum["ratio"], l=t.rank)),
                "note": erratum["note"],
            },
        }

    def bounds_frame(self, max_rank: int = 8) -> pd.DataFrame:
        rows = []
        for name in self._types(max_rank):
            R = build_root_system(name)
            computed = bound_data(R)
            printed = self.printed_levi_data(R)
            rows.append({
                "type": name,
                "dim_g": computed["dim_g"],
                "computed": computed["bound"],
                "printed": printed["bound"],
                "match": computed["bound"] == printed["bound"],
            })
        return pd.DataFrame(rows)

    def levi_frame(self, max_rank: int = 8) -> pd.DataFrame:
        """Argmax nodes and the ratio 2 dim G / (dim G - dim L), classified per entry."""
        rows = []
        exceptions = self.bounds.get("argmax_exceptions", {})
        for name in self._types(max_rank):
            R = build_root_system(name)
            computed = bound_data(R)
            printed = self.printed_levi_data(R)

            argmax_status = "match" if computed["argmax_nodes"] == printed["argmax"] else "mismatch"
            note = ""
            if argmax_status == "mismatch" and name in exceptions:
                if sorted(exceptions[name]["argmax"]) == computed["argmax_nodes"]:
                    argmax_status, note = "erratum", exceptions[name]["note"]

            ratio_status = "match" if computed["ratio"] == printed["ratio"] else "mismatch"
            if ratio_status == "mismatch" and printed["erratum"] and printed["erratum"]["ratio"] == computed["ratio"]:
                ratio_status = "erratum"
                note = "; ".join(filter(None, [note, printed["erratum"]["note"]]))

            rows.append({
                "type": name,
                "argmax_computed": computed["argmax_nodes"],
                "argmax_printed": printed["argmax"],
                "argmax_status": argmax_status,
                "ratio_computed": str(computed["ratio"]),
                "ratio_printed": str(printed["ratio"]),
                "ratio_status": ratio_status,
                "note": note,
            })
        return pd.DataFrame(rows)

    # multiples of one fundamental weight

    def fundamental_rule(self, R: RootSystem, d: int, i: int) -> Dict[str, Any]:
        """Decide the equal-index tuple (m_1 w_i, ..., m_d w_i), d >= 3."""
        if d < 3:
            raise ValueError(f"The equal-index rule applies to d >= 3, got {d}")
        t = R.simple_type
        if not 1 <= i <= t.rank:
            raise ValueError(f"Node {i} out of range 1..{t.rank}")
        rules = self.fundamental["rules"]
        rule = rules.get(str(t)) or rules.get(t.family)
        if rule is None:
            raise ValueError(f"No equal-index rule for {t}")
        if rule.get("never"):
            holds = False
        elif "inequality" in rule:
            holds = bool(evaluate_formula(rule["inequality"], l=t.rank, d=d, i=i))
        else:
            nodes = {node_index(n, t.rank) for n in rule["nodes"]}
            holds = d in rule["d_values"] and i in nodes
        return {"rule": rule["id"], "primitive": holds}

    def equal_index_length(self, R: RootSystem) -> int:
        """Largest d with some primitive equal-index d-tuple; 2 when every triple fails."""
        d = 2
        while any(self.fundamental_rule(R, d + 1, i)["primitive"] for i in range(1, R.rank + 1)):
            d += 1
        return d

    def fundamental_frame(self, max_rank: int = 8) -> pd.DataFrame:
        """Type A equal-index rule against the quiver criterion."""
        rows = []
        for l in range(1, max_rank + 1):
            R = build_root_system(f"A{l}")
            for i in range(1, l + 1):
                for d in range(3, l + 4):
                    rule = self.fundamental_rule(R, d, i)["primitive"]
                    quiver = is_primitive_sln_fund(l + 1, [i] * d)
                    rows.append({"type": f"A{l}", "i": i, "d": d, "rule": rule, "quiver": quiver,
                                 "match": rule == quiver})
        return pd.DataFrame(rows)

    # primitive triples by supports

    def _support_matches(self, constraint: Dict[str, Any], s: frozenset, rank: int) -> bool:
        kind = constraint["kind"]
        if kind == "any":
            return True
        if kind == "exact":
            return s == frozenset(node_index(n, rank) for n in constraint["nodes"])
        if kind == "one_of":
            return any(s == frozenset(node_index(n, rank) for n in option) for option in constraint["options"])
        if kind == "size":
            return len(s) == constraint["size"]
        if kind == "size_at_least":
            return len(s) >= constraint["size"]
        if kind == "full":
            return s == frozenset(range(1, rank + 1))
        if kind == "singleton_except":
            excluded = {node_index(n, rank) for n in constraint["except"]}
            return len(s) == 1 and not s & excluded
        if kind == "not":
            return s != frozenset(node_index(n, rank) for n in constraint["nodes"])
        if kind == "pair_chain":
            if len(s) != 2:
                return False
            a, b = sorted(s)
            return (b == a + 1 and a < rank) or a == 1
        raise ValueError(f"Unknown support constraint kind '{kind}'")

    def match_triple(self, R: RootSystem, supports: Sequence[frozenset]) -> Optional[Dict[str, Any]]:
        """First table row matched by the supports, up to permutation and diagram automorphism."""
        if len(supports) != 3:
            return None
        t = R.simple_type
        rows = [row for row in self.triples["rows"] if row["family"] in (str(t), t.family)]
        for row in rows:
            for automorphism in R.diagram_automorphisms():
                image = [frozenset(automorphism[n - 1] for n in s) for s in supports]
                for order in permutations(range(3)):
                    ordered = [image[k] for k in order]
                    if all(self._support_matches(c, s, t.rank) for c, s in zip(row["supports"], ordered)):
                        return {
                            "rule": row["id"],
                            "automorphism": list(automorphism),
                            "order": [k + 1 for k in order],
                        }
        return None

    def triple_instances(self, R: RootSystem) -> List[Tuple[str, List[Tuple[int, ...]]]]:
        """One coefficient-1 instance per applicable row, choosing the least admissible supports."""
        t = R.simple_type
        r = t.rank
        nodes = range(1, r + 1)
        candidates = [frozenset([n]) for n in nodes] + [frozenset([a, b]) for a in nodes for b in nodes if a < b]
        candidates += [frozenset(range(1, k + 1)) for k in range(3, r + 1)]
        instances = []
        for row in self.triples["rows"]:
            if row["family"] not in (str(t), t.family):
                continue
            chosen = []
            for constraint in row["supports"]:
                s = next((c for c in candidates if self._support_matches(constraint, c, r)), None)
                if s is None:
                    break
                chosen.append(s)
            if len(chosen) < 3:
                continue
            weights = [tuple(1 if n in s else 0 for n in nodes) for s in chosen]
            instances.append((row["id"], weights))
        return instances

    def triples_frame(self, max_rank: int = 8, samples: int = 20, seed: int = 42) -> pd.DataFrame:
        """One instance per triple row, rechecked with the flag-variety oracle in classical types."""
        rows = []
        for name in self._types(max_rank):
            R = build_root_system(name)
            for rule, weights in self.triple_instances(R):
                if R.simple_type.family not in FLAGS_CONFIG["supported_families"]:
                    status = "skipped"
                else:
                    supports = [sorted(n + 1 for n, c in enumerate(w) if c) for w in weights]
                    verdict = open_orbit_flags(R, supports, samples=samples, seed=seed)
                    status = "confirmed" if verdict["status"] == "open" else "unconfirmed"
                rows.append({"type": name, "rule": rule, "weights": [list(w) for w in weights], "status": status})
        return pd.DataFrame(rows)

    # traceability

    def _test_names(self) -> set:
        names = set()
        for path in sorted(TESTS_DIR.glob("test_*.py")):
            for match in re.finditer(r"^\s*def (test_\w+)", path.read_text(encoding="utf-8"), re.MULTILINE):
                names.add(f"{path.stem}::{match.group(1)}")
        return names

    @staticmethod
    def _resolves(operation: str) -> bool:
        module_name, _, attribute = operation.rpartition(".")
        try:
            module = importlib.import_module(module_name)
        except ImportError:
            return False
        target = module
        for part in attribute.split(":"):
            if not hasattr(target, part):
                return False
            target = getattr(target, part)
        return True

    def traceability_frame(self) -> pd.DataFrame:
        tests = self._test_names()
        rows = []
        for entry in self.traceability["claims"]:
            missing = [t for t in entry["tests"] if t not in tests]
            rows.append({
                "claim": entry["id"],
                "statement": entry["statement"],
                "operation": entry["operation"],
                "tests": entry["tests"],
                "resolved": self._resolves(entry["operation"]),
                "tested": bool(entry["tests"]) and not missing,
                "missing_tests": missing,
            })
        return pd.DataFrame(rows)


def fixture_traceability_report() -> Dict[str, Any]:
    """Claim -> operation -> tests matrix; complete only if every claim resolves and is tested."""
    frame = TableRegistry().traceability_frame()
    entries = frame.to_dict(orient="records")
    return {
        "complete": bool(frame["resolved"].all() and frame["tested"].all()) if len(frame) else False,
        "claims": len(entries),
        "entries": entries,
    }


def dump_yaml(payload: Dict[str, Any]) -> str:
    return yaml.safe_dump(payload, sort_keys=True, default_flow_style=False)
