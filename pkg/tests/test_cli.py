import json
from pathlib import Path

import jsonschema
import pytest

import app


def run(capsys, *argv):
    code = app.main(["--no-cache", *argv])
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    return code, json.loads(out)


def test_decompose_e6_square(capsys):
    code, payload = run_json(capsys, "decompose", "--type", "E6", "--l", "1,0,0,0,0,0", "--r", "1,0,0,0,0,0")
    assert code == 0
    assert len(payload["decomposition"]) == 3
    assert payload["dimension_check"] is True


def test_lr_coefficient(capsys):
    code, payload = run_json(capsys, "lr", "--type", "A1", "--weights", "1;1;1", "--mu", "1")
    assert code == 0
    assert payload["value"] == 2


def test_prim_check_definite_verdicts(capsys):
    code, payload = run_json(capsys, "prim", "check", "--type", "A1", "--weights", "1;1;1;1", "--replay")
    assert code == 0
    assert payload["status"] == "No"
    assert payload["replayed"] is True
    code, payload = run_json(capsys, "prim", "check", "--type", "A2", "--weights", "1,0;1,0;1,0")
    assert code == 0
    assert payload["status"] == "Yes"


def test_prim_at_weight(capsys):
    code, payload = run_json(capsys, "prim", "at", "--type", "A1", "--weights", "1;1", "--mu", "2")
    assert code == 0
    assert payload["status"] == "Yes"
    assert payload["mu"] == [2]


def test_prim_bounds(capsys):
    code, payload = run_json(capsys, "prim", "bounds", "--type", "G2")
    assert code == 0
    assert (payload["lower"], payload["upper"], payload["upper_weyl"]) == (2, 4, 13)


def test_unknown_verdict_exit_code(capsys):
    code, payload = run_json(capsys, "--bound", "2", "invfree", "--type", "A3", "--weights", "1,0,0;1,0,0;1,0,0")
    assert code == 2
    assert payload["status"] == "Unknown"


def test_stable_with_witness(capsys):
    code, payload = run_json(capsys, "stable", "--type", "A1", "--weights", "1;1", "--witness")
    assert code == 0
    assert payload["status"] == "stable_certified"
    assert payload["witness"]["status"] == "success"


def test_usage_errors(capsys):
    code, payload = run_json(capsys, "prim", "check", "--type", "A2")
    assert code == 1
    assert "error" in payload
    code, payload = run_json(capsys, "prim", "check", "--type", "A2", "--weights", "1,x")
    assert code == 1
    code, payload = run_json(capsys, "prim", "check", "--type", "Q3", "--weights", "1,0,0")
    assert code == 1
    code, payload = run_json(capsys, "--bound", "0", "config")
    assert code == 1
    code, payload = run_json(capsys)
    assert code == 1


def test_dihedral_separation_index(capsys):
    code, payload = run_json(capsys, "sep", "--dihedral", "5")
    assert code == 0
    assert payload["value"] == 4
    assert payload["status"] == "exact"


def test_sep_for_a_root_system(capsys):
    code, payload = run_json(capsys, "sep", "--type", "A2")
    assert code == 0
    assert payload["value"] == 6
    assert payload["verified"] is True


def test_quiver_commands(capsys):
    code, payload = run_json(capsys, "quiver", "canon", "--d", "2", "--gamma", "1,2,0")
    assert code == 0
    assert sorted(s["root"] for s in payload["summands"]) == [[0, 1, 0], [1, 1, 0]]
    code, payload = run_json(capsys, "quiver", "prim", "--n", "2", "--indices", "1,1,1,1")
    assert code == 0
    assert payload["primitive"] is False


def test_flags_open(capsys):
    code, payload = run_json(capsys, "flags", "open", "--type", "A2", "--supports", "1|1")
    assert code == 0
    assert payload["status"] == "open"
    assert payload["primitivity"]["status"] == "Yes"


def test_config(capsys):
    code, payload = run_json(capsys, "--seed", "7", "config")
    assert code == 0
    assert payload["run"]["seed"] == 7
    assert payload["run"]["cache_enabled"] is False


def test_run_options_after_the_subcommand(capsys):
    code, payload = run_json(capsys, "config", "--seed", "9", "--bound", "5", "--samples", "3", "--budget-ms", "100")
    assert code == 0
    assert payload["run"]["seed"] == 9
    assert payload["run"]["search_bound"] == 5
    assert payload["run"]["sample_count"] == 3
    assert payload["run"]["time_budget_ms"] == 100
    code, payload = run_json(capsys, "--seed", "3", "--bound", "6", "config", "--seed", "11")
    assert payload["run"]["seed"] == 11
    assert payload["run"]["search_bound"] == 6


def test_prim_check_with_a_bound_on_the_leaf_command(capsys):
    weights = ";".join(["1,0,0,0,0,0"] * 4)
    code, payload = run_json(capsys, "prim", "check", "--type", "E6", "--weights", weights, "--bound", "8")
    assert code == 0
    assert payload["status"] == "Yes"
    code, payload = run_json(capsys, "prim", "check", "--type", "A1", "--weights", "1;1;1;1", "--bound", "0")
    assert code == 1
    assert "error" in payload


def test_tables_verify(capsys):
    code, payload = run_json(capsys, "tables", "verify", "--table", "bounds", "--max-rank", "3")
    assert code == 0
    assert payload["ok"] is True


@pytest.mark.parametrize("number,name", [("1", "bounds"), ("2", "fundamental"), ("4", "levi")])
def test_tables_verify_by_number(capsys, number, name):
    code, payload = run_json(capsys, "tables", "verify", "--table", number, "--max-rank", "3")
    assert code == 0
    assert payload["table"] == name
    assert payload["ok"] is True
    code, payload = run_json(capsys, "tables", "verify", "--table", "5")
    assert code == 1


def test_tables_trace_yaml(capsys):
    code, out = run(capsys, "tables", "trace", "--format", "yaml")
    assert code == 0
    assert "complete: true" in out


SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


def validate(payload, name):
    schema = json.loads((SCHEMAS / f"{name}.v1.json").read_text(encoding="utf-8"))
    jsonschema.validate(instance=payload, schema=schema)


@pytest.mark.parametrize(
    "argv,schema",
    [
        (["prim", "check", "--type", "A1", "--weights", "1;1;1;1"], "verdict"),
        (["prim", "check", "--type", "A2", "--weights", "1,0;0,1;1,1"], "verdict"),
        (["prim", "at", "--type", "A1", "--weights", "1;1;1", "--mu", "1"], "verdict"),
        (["invfree", "--type", "A2", "--weights", "1,0;0,1"], "verdict"),
        (["stable", "--type", "A2", "--weights", "1,1;1,0;0,1", "--witness"], "stability"),
        (["sep", "--type", "G2"], "separation_index"),
        (["sep", "--dihedral", "7"], "separation_index"),
        (["flags", "open", "--type", "B3", "--supports", "1|3"], "orbit"),
        (["quiver", "oracle", "--d", "3", "--gamma", "2,1,1,1"], "orbit"),
        (["prim", "check", "--type", "A2", "--weights", "1,0,0"], "error"),
    ],
)
def test_outputs_follow_their_schemas(capsys, argv, schema):
    _, payload = run_json(capsys, *argv)
    validate(payload, schema)
