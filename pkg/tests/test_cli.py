import json
import math

import pytest

from algebroid_laplace.cli import main

from conftest import SCENARIOS

A = str(SCENARIOS / "fixture_a.json")
B = str(SCENARIOS / "fixture_b.json")
C = str(SCENARIOS / "fixture_c.json")
CBAD = str(SCENARIOS / "fixture_c_corrupted.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_passes(capsys):
    code, out, _ = run(capsys, "validate", C)
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert {e["suite"] for e in rep["entries"]} == {"algebroid"}


def test_validate_corrupted_fails(capsys):
    code, out, _ = run(capsys, "validate", CBAD)
    assert code == 1
    assert not json.loads(out)["pass"]


def test_tensors(capsys):
    code, out, _ = run(capsys, "tensors", B, "--at", "z1=1,u1=1")
    data = json.loads(out)
    assert code == 0
    assert data["N"] == [[[1.0, 0.0]]]
    assert data["det"][0] == pytest.approx(math.e)
    assert "upper index first" in data["index_order"]


def test_laplacian_function(capsys):
    code, out, _ = run(capsys, "laplacian", C, "--fn", "z1*conj(z1)", "--at", "z1=1,u1=1,u2=1")
    data = json.loads(out)
    assert code == 0
    assert data["value"][0] == pytest.approx(5 / math.e)
    assert data["value"][1] == 0


def test_laplacian_form(capsys):
    code, out, _ = run(capsys, "laplacian", A, "--form", "phi", "--kind", "box", "--at", "z1=1,u1=1")
    data = json.loads(out)
    assert code == 0
    assert data["coefficients"]["|1"]["value"] == [-1.0, 0.0]


@pytest.mark.parametrize("argv", [
    ["laplacian", A, "--at", "z1=1,u1=1"],
    ["laplacian", A, "--fn", "z1", "--form", "phi", "--at", "z1=1,u1=1"],
    ["laplacian", A, "--form", "nope", "--kind", "box", "--at", "z1=1,u1=1"],
    ["laplacian", A, "--form", "phi", "--kind", "h", "--at", "z1=1,u1=1"],
    ["laplacian", A, "--fn", "z1+", "--at", "z1=1,u1=1"],
    ["tensors", A, "--at", "z1=1"],
    ["tensors", A, "--at", "z1=1,u1=1,u1=2"],
    ["tensors", str(SCENARIOS / "missing.json"), "--at", "z1=1,u1=1"],
    ["integrate", A, "--field", "nope"],
    ["check", A, "--suite", "bogus"],
    ["check", A, "--samples", "0"],
    ["check", A, "--box", "3..1"],
    [],
])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_malformed_json_reports_location(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"n": 1,\n "m": 1,,}')
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2
    assert "line 2" in err


def test_missing_field(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"n": 1, "m": 1, "anchor": [["1"]]}))
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2
    assert "finsler" in err


def test_bad_expression_location(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"n": 1, "m": 1, "anchor": [["z1 +* 2"]], "finsler": "u1*conj(u1)"}))
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2
    assert "anchor[1][1]" in err


def test_check_suite_connection_deterministic(capsys):
    first = run(capsys, "check", C, "--suite", "connection")
    second = run(capsys, "check", C, "--suite", "connection")
    assert first == second
    assert first[0] == 0
    entry = json.loads(first[1])["entries"][0]
    assert set(entry) >= {"suite", "identity", "max_residual", "tolerance", "samples", "seed", "pass"}


def test_integrals_skipped_over_budget(capsys):
    code, out, _ = run(capsys, "check", C, "--suite", "integrals")
    entries = json.loads(out)["entries"]
    assert code == 0
    assert entries[0]["skipped"] and "budget" in entries[0]["note"]


def test_integrate_flat(capsys):
    code, out, _ = run(capsys, "integrate", A, "--field", "gauss", "--grid", "32")
    data = json.loads(out)
    assert code == 0 and data["pass"]
    assert abs(complex(*data["integral"])) <= 1e-3
    assert data["grid"] == 32


def test_integrate_fixture_b_fails_honestly(capsys):
    code, out, _ = run(capsys, "integrate", B, "--field", "gauss", "--grid", "40", "--box=-3..3")
    data = json.loads(out)
    assert code == 1
    assert data["integral"][0] == pytest.approx(-math.pi ** 2 / 4, abs=1e-4)
    assert abs(complex(*data["anchor_divergence_corrected_integral"])) <= 1e-3
