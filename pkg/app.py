import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

# Add src directory to path for imports
sys.path.append(str(Path(__file__).parent / "src"))

from config.settings import CHARS_CONFIG, EXIT_CODES, get_config, get_run_config, setup_logging
from src.rootsys import build_root_system
from src.chars import CharacterEngine
from src.primcheck import PrimitivityChecker, TupleQuery
from src.quiver import canonical_decomposition, sln_fund_certificate, open_orbit_oracle
from src.flagorbit import open_orbit_flags, primitivity_bridge
from src.sep import sep_index, sep_index_dihedral, dihedral_certificate, verify_separating
from src.tables import TableRegistry, fixture_traceability_report, dump_yaml
from utils.helpers import parse_vector, parse_weight_tuple, parse_supports, dump_json

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; report through the JSON channel instead."""

    def error(self, message):
        raise UsageError(message)


TABLE_ALIASES = {"1": "bounds", "2": "fundamental", "3": "triples", "4": "levi"}


def _add_run_options(parser: argparse.ArgumentParser, default: Any) -> None:
    parser.add_argument("--seed", type=int, default=default)
    parser.add_argument("--bound", type=int, default=default, help="witness search bound on sum n_i")
    parser.add_argument("--samples", type=int, default=default)
    parser.add_argument("--budget-ms", type=int, default=default)
    parser.add_argument("--workers", type=int, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="primtuples", description="Primitivity and invariant-freeness of weight tuples")
    _add_run_options(parser, None)
    parser.add_argument("--cache-dir", default=None)
    parser.add_argument("--no-cache", action="store_true")
    parser.add_argument("--log-level", default=None)
    # leaf commands accept the run options too; absent ones keep the top-level value
    common = _Parser(add_help=False)
    _add_run_options(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("decompose", parents=[common], help="E_l (x) E_r as a multiset of highest weights")
    p.add_argument("--type", required=True)
    p.add_argument("--l", required=True)
    p.add_argument("--r", required=True)

    p = sub.add_parser("lr", parents=[common], help="Littlewood-Richardson coefficient c^mu of a tuple")
    p.add_argument("--type", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--mu", default=None)

    prim = sub.add_parser("prim", help="primitivity verdicts").add_subparsers(dest="action", parser_class=_Parser)
    p = prim.add_parser("check", parents=[common])
    p.add_argument("--type", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--replay", action="store_true")
    p = prim.add_parser("at", parents=[common])
    p.add_argument("--type", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--mu", required=True)
    p.add_argument("--replay", action="store_true")
    p = prim.add_parser("bounds", parents=[common])
    p.add_argument("--type", required=True)

    p = sub.add_parser("invfree", parents=[common], help="invariant-freeness verdict")
    p.add_argument("--type", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--replay", action="store_true")

    p = sub.add_parser("stable", parents=[common], help="stability of the action on the product of cones")
    p.add_argument("--type", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--witness", action="store_true", help="also build a closed-orbit witness")

    quiver = sub.add_parser("quiver", help="star quiver tools").add_subparsers(dest="action", parser_class=_Parser)
    p = quiver.add_parser("canon", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p = quiver.add_parser("prim", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--indices", required=True)
    p = quiver.add_parser("oracle", parents=[common])
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--gamma", required=True)

    flags = sub.add_parser("flags", help="multiple flag varieties").add_subparsers(dest="action", parser_class=_Parser)
    p = flags.add_parser("open", parents=[common])
    p.add_argument("--type", required=True)
    p.add_argument("--supports", required=True)

    p = sub.add_parser("sep", parents=[common], help="separation index")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--type")
    group.add_argument("--dihedral", type=int)

    tables = sub.add_parser("tables", help="rule tables").add_subparsers(dest="action", parser_class=_Parser)
    p = tables.add_parser("verify", parents=[common])
    p.add_argument("--table", required=True, choices=["bounds", "levi", "fundamental", "triples", *TABLE_ALIASES])
    p.add_argument("--max-rank", type=int, default=8)
    p = tables.add_parser("trace", parents=[common])
    p.add_argument("--format", choices=["json", "yaml"], default="json")

    sub.add_parser("config", parents=[common], help="print the merged configuration")
    return parser


def _engine(run: Dict[str, Any]) -> CharacterEngine:
    return CharacterEngine(cache_dir=run["cache_dir"], cache_enabled=run["cache_enabled"],
                           use_e6_fastpath=CHARS_CONFIG["use_e6_fastpath"],
                           max_orbit_size=CHARS_CONFIG["max_orbit_size"])


def _checker(run: Dict[str, Any]) -> PrimitivityChecker:
    return PrimitivityChecker(engine=_engine(run), search_bound=run["search_bound"], samples=run["sample_count"],
                              seed=run["seed"], workers=run["workers"])


def _verdict_exit(status: str) -> int:
    return EXIT_CODES["unknown"] if status in ("Unknown", "unknown", "probably_not_open") else EXIT_CODES["definite"]


def _run(args: argparse.Namespace, run: Dict[str, Any]) -> Tuple[Dict[str, Any], int]:
    command = args.command
    if command == "decompose":
        R = build_root_system(args.type)
        engine = _engine(run)
        lam, mu = parse_vector(args.l), parse_vector(args.r)
        product = engine.tensor_decompose(R, lam, mu)
        expected = engine.weyl_dim(R, lam) * engine.weyl_dim(R, mu)
        return {"type": str(R.simple_type), "l": list(lam), "r": list(mu), "decomposition": product.to_json(),
                "dimension_check": product.total_dimension(engine, R) == expected}, EXIT_CODES["definite"]

    if command == "lr":
        R = build_root_system(args.type)
        weights = parse_weight_tuple(args.weights)
        mu = parse_vector(args.mu) if args.mu else tuple([0] * R.rank)
        value = _engine(run).lr_coefficient(R, weights, mu)
        return {"type": str(R.simple_type), "weights": weights, "mu": list(mu), "value": value}, EXIT_CODES["definite"]

    if command == "prim":
        if args.action is None:
            raise UsageError("prim needs one of: check, at, bounds")
        checker = _checker(run)
        if args.action == "bounds":
            return checker.prim_lower_bounds(build_root_system(args.type)), EXIT_CODES["definite"]
        weights = parse_weight_tuple(args.weights)
        if args.action == "check":
            verdict = checker.check_primitive(TupleQuery(type=args.type, weights=weights))
        else:
            query = TupleQuery(type=args.type, weights=weights, mode="primitive_at_mu", mu=parse_vector(args.mu))
            verdict = checker.check_primitive_at(query, query.mu)
        payload = verdict.to_dict()
        if args.replay:
            payload["replayed"] = checker.replay_certificate(verdict)
        return payload, _verdict_exit(verdict.status)

    if command == "invfree":
        checker = _checker(run)
        verdict = checker.check_invariant_free(TupleQuery(type=args.type, weights=parse_weight_tuple(args.weights),
                                                          mode="invariant_free"))
        payload = verdict.to_dict()
        if args.replay:
            payload["replayed"] = checker.replay_certificate(verdict)
        return payload, _verdict_exit(verdict.status)

    if command == "stable":
        checker = _checker(run)
        query = TupleQuery(type=args.type, weights=parse_weight_tuple(args.weights), mode="stable")
        verdict = checker.check_stable(query)
        payload = verdict.to_dict()
        payload["status"] = "stable_certified" if verdict.status == "Yes" else "unknown"
        if args.witness:
            payload["witness"] = checker.stable_witness_point(query)
        return payload, _verdict_exit(verdict.status)

    if command == "quiver":
        if args.action is None:
            raise UsageError("quiver needs one of: canon, prim, oracle")
        if args.action == "canon":
            gamma = parse_vector(args.gamma)
            return canonical_decomposition(args.d, gamma).to_dict(), EXIT_CODES["definite"]
        if args.action == "prim":
            indices = list(parse_vector(args.indices))
            result = sln_fund_certificate(args.n, indices)
            return {"n": args.n, "indices": indices, "primitive": bool(result["open"]), "certificate": result}, \
                EXIT_CODES["definite"]
        result = open_orbit_oracle(args.d, parse_vector(args.gamma), samples=run["sample_count"], seed=run["seed"],
                                   workers=run["workers"])
        return result, _verdict_exit(result["status"])

    if command == "flags":
        if args.action is None:
            raise UsageError("flags needs: open")
        R = build_root_system(args.type)
        supports = parse_supports(args.supports)
        result = open_orbit_flags(R, supports, samples=run["sample_count"], seed=run["seed"], workers=run["workers"])
        weights = [tuple(1 if j + 1 in s else 0 for j in range(R.rank)) for s in supports]
        result["primitivity"] = primitivity_bridge(weights, result)
        return result, _verdict_exit(result["status"])

    if command == "sep":
        if args.dihedral is not None:
            certificate = dihedral_certificate(args.dihedral)
            return {"type": f"I2({args.dihedral})", "status": "exact", "value": sep_index_dihedral(args.dihedral),
                    "certificate": {"arcs": certificate}}, EXIT_CODES["definite"]
        R = build_root_system(args.type)
        result = sep_index(R, run["time_budget_ms"], workers=run["workers"])
        if result["status"] == "exact":
            result["verified"] = verify_separating(R, result["certificate"]["chambers"])
        return result, _verdict_exit(result["status"])

    if command == "tables":
        if args.action is None:
            raise UsageError("tables needs one of: verify, trace")
        registry = TableRegistry()
        if args.action == "trace":
            report = fixture_traceability_report()
            if args.format == "yaml":
                return {"yaml": dump_yaml(report)}, EXIT_CODES["definite"] if report["complete"] else EXIT_CODES["usage"]
            return report, EXIT_CODES["definite"] if report["complete"] else EXIT_CODES["usage"]
        table = TABLE_ALIASES.get(args.table, args.table)
        frame = _verify_frame(registry, table, args.max_rank, run)
        ok = bool(frame["ok"].all()) if len(frame) else True
        return {"table": table, "ok": ok, "rows": frame.to_dict(orient="records")}, \
            EXIT_CODES["definite"] if ok else EXIT_CODES["usage"]

    if command == "config":
        return {**get_config(), "run": run}, EXIT_CODES["definite"]

    raise UsageError("a subcommand is required")


def _verify_frame(registry: TableRegistry, table: str, max_rank: int, run: Dict[str, Any]):
    if table == "bounds":
        frame = registry.bounds_frame(max_rank)
        frame["ok"] = frame["match"]
    elif table == "levi":
        frame = registry.levi_frame(max_rank)
        frame["ok"] = (frame["argmax_status"] != "mismatch") & (frame["ratio_status"] != "mismatch")
    elif table == "fundamental":
        frame = registry.fundamental_frame(max_rank)
        frame["ok"] = frame["match"]
    else:
        frame = registry.triples_frame(max_rank, samples=run["sample_count"], seed=run["seed"])
        frame["ok"] = frame["status"] != "unconfirmed"
    return frame


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        setup_logging(args.log_level)
        run = get_run_config(seed=args.seed, search_bound=args.bound, sample_count=args.samples,
                             time_budget_ms=args.budget_ms, cache_dir=args.cache_dir, workers=args.workers)
        if args.no_cache:
            run["cache_enabled"] = False
        payload, code = _run(args, run)
    except (ValueError, NotImplementedError) as e:
        print(dump_json({"error": str(e)}))
        return EXIT_CODES["usage"]
    if set(payload) == {"yaml"}:
        print(payload["yaml"], end="")
    else:
        print(dump_json(payload))
    return code


if __name__ == "__main__":
    sys.exit(main())
