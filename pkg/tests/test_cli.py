import json
import math
from pathlib import Path

import pytest

from hitgeom import cli

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def schema(doc, prefix=""):
    out = set()
    if isinstance(doc, dict):
        for k, v in doc.items():
            out |= schema(v, f"{prefix}.{k}" if prefix else k)
    elif isinstance(doc, list) and doc and isinstance(doc[0], dict):
        for v in doc:
            out |= schema(v, prefix + "[]")
    else:
        out.add(prefix)
    return out


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "two_state.json"
    path.write_text(json.dumps({"states": ["s0", "s1"], "P": [[0.5, 0.5], [0.25, 0.75]]}))
    return str(path)


def test_analyze_file(capsys, chain_file):
    code, out, _ = run(capsys, "analyze", "--chain", chain_file, "--state", "s1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["all_pass"] is True
    assert abs(doc["reports"]["fastest"]["tv_bound"]) <= 1e-10
    assert doc["comparison"]["daly_bound"] == pytest.approx(1 / 9)


def test_analyze_builtin_matches_file(capsys, chain_file):
    _, from_file, _ = run(capsys, "analyze", "--chain", chain_file, "--state", "s1", "--format", "json")
    _, builtin, _ = run(capsys, "analyze", "--builtin", "two-state", "--delta", "0.25", "--state", "1", "--format", "json")
    a, b = json.loads(from_file), json.loads(builtin)
    for doc in (a, b):
        doc.pop("chain")
        doc.pop("state")
        for rep in doc["reports"].values():
            rep.pop("state")
        doc["greedy"].pop("dual_row")
        doc["greedy"].pop("A")
    assert a == b


def test_csv_input(capsys, tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("0.5,0.5\n0.25,0.75\n")
    code, out, _ = run(capsys, "greedy", "--chain", str(path), "--csv", "--state", "1", "--format", "json")
    assert code == 0
    assert json.loads(out)["p_absorb"] == pytest.approx(0.75)


@pytest.mark.parametrize(
    "text, where",
    [
        ('{"states": ["a", "b"],\n "P": [[0.5, 0.5], [0.5 0.5]]}', ":2:"),
        ("[1, 2]", "top level"),
        ('{"states": ["a"]}', "missing field 'P'"),
        ('{"states": ["a", "b"], "P": [[0.5, "x"], [0.5, 0.5]]}', "P[0][1]"),
    ],
)
def test_parse_errors_exit_2(capsys, tmp_path, text, where):
    path = tmp_path / "bad.json"
    path.write_text(text)
    code, out, err = run(capsys, "analyze", "--chain", str(path), "--state", "a")
    assert code == 2 and out == ""
    assert where in err and str(path) in err


def test_missing_file_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", "--chain", str(tmp_path / "nope.json"), "--state", "a")
    assert code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--builtin", "two-state", "--delta", "0.5", "--state", "1"],  # reducible
        ["analyze", "--builtin", "two-state", "--state", "9"],
        ["simulate", "--builtin", "two-state", "--state", "1", "--samples", "0"],
        ["sweep", "--count", "1", "--size", "1"],
        ["sweep", "--count", "0"],
        ["analyze", "--builtin", "iid", "--state", "0"],
    ],
)
def test_validation_errors_exit_3(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 3 and out == "" and "validation error" in err


def test_periodic_chain_exit_3(capsys, tmp_path):
    path = tmp_path / "flip.json"
    path.write_text('{"states": ["a", "b"], "P": [[0, 1], [1, 0]]}')
    assert run(capsys, "analyze", "--chain", str(path), "--state", "a")[0] == 3


def test_numeric_diagnostic_exit_4(capsys, monkeypatch):
    monkeypatch.setattr("hitgeom.hitting.KAC_TOL", -1.0)
    code, out, err = run(capsys, "analyze", "--builtin", "two-state", "--state", "1")
    assert code == 4 and "KacMismatch" in err


def test_failed_check_exit_1_is_loud(capsys):
    # this chain puts greedy mass on an intermediate set, which breaks its checks
    code, out, err = run(capsys, "sweep", "--count", "3", "--size", "4", "--seed", "7", "--format", "json")
    assert code == 1 and "CHECK FAILED" in err
    doc = json.loads(out)
    assert sum(doc["failures"]["fastest"].values()) == 0
    assert doc["total_failures"] > 0


def test_sweep_fastest_only(capsys):
    code, out, _ = run(capsys, "sweep", "--count", "10", "--size", "4", "--seed", "7", "--sst", "fastest", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["reports"] == 40 and doc["greedy_not_dominating_fastest"] is None


def test_sweep_two_state_is_reversible(capsys):
    code, out, _ = run(capsys, "sweep", "--count", "1", "--size", "2", "--format", "json")
    assert json.loads(out)["reversible_chains"] == 1


@pytest.mark.parametrize(
    "name, argv",
    [
        ("analyze", ["analyze", "--builtin", "two-state", "--state", "1"]),
        ("simulate", ["simulate", "--builtin", "two-state", "--state", "1", "--samples", "1000"]),
        ("sweep", ["sweep", "--count", "2", "--size", "3"]),
    ],
)
def test_json_schema_is_pinned(capsys, name, argv):
    _, out, _ = run(capsys, *argv, "--format", "json")
    expected = json.loads((GOLDEN / f"{name}_schema.json").read_text())
    assert sorted(schema(json.loads(out))) == expected


def flatten(doc, prefix=""):
    if isinstance(doc, dict):
        return [kv for k, v in doc.items() for kv in flatten(v, f"{prefix}.{k}" if prefix else k)]
    if isinstance(doc, list) and doc and any(isinstance(v, (dict, list)) for v in doc):
        return [kv for i, v in enumerate(doc) for kv in flatten(v, f"{prefix}[{i}]")]
    return [(prefix, doc)]


def test_table_and_json_carry_the_same_values(capsys, monkeypatch):
    monkeypatch.setenv("NO_COLOR", "1")
    argv = ["analyze", "--builtin", "birth-death", "--size", "4", "--state", "2"]
    _, table, _ = run(capsys, *argv)
    _, js, _ = run(capsys, *argv, "--format", "json")
    rows = {}
    for line in table.splitlines():
        key, _, value = line.partition("  ")
        rows[key.strip()] = json.loads(value.strip())
    expected = dict(flatten(json.loads(js)))
    assert rows.keys() == expected.keys()
    for k, v in expected.items():
        if isinstance(v, float) and math.isnan(v):
            continue
        assert rows[k] == v, k


def test_simulate_byte_identical(capsys):
    argv = ["simulate", "--builtin", "two-state", "--state", "1", "--seed", "9", "--samples", "20000", "--format", "json"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
    assert first[0] == 0


def test_theta_flag(capsys):
    code, out, _ = run(capsys, "analyze", "--builtin", "two-state", "--state", "1", "--theta", "0.405465108108164", "--format", "json")
    checks = json.loads(out)["reports"]["fastest"]["mgf_checks"]
    assert len(checks) == 1
    assert checks[0]["bound"] == pytest.approx(5 / 3, abs=1e-9)


def test_sst_command_reports_invalid_return_law(capsys, tmp_path):
    path = tmp_path / "c.json"
    P = [[0.06, 0.21, 0.73], [0.79, 0.12, 0.09], [0.28, 0.07, 0.65]]
    path.write_text(json.dumps({"states": ["a", "b", "c"], "P": P}))
    code, out, _ = run(capsys, "sst", "--chain", str(path), "--state", "a", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["return_probability"]["issues"]
    assert "pmf" not in doc["return_probability"]
    assert doc["fastest"]["issues"] == []
