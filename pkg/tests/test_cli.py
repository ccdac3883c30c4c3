import json
import math

import pytest

from cayley_qmc import acceptance, cli


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_coeffs_json(capsys):
    code, out, _ = run_cli(capsys, ["coeffs", "--j0", "1", "--j", "0.5", "--beta", "0.5"])
    assert code == 0
    doc = json.loads(out)
    assert doc["k0"] == pytest.approx((math.exp(0.5) + 1) / 2)
    assert doc["k3"] == pytest.approx((math.exp(0.5) - 1) / 2)
    assert doc["c3"] == pytest.approx((math.exp(2) - 1) / 2)
    assert "r1" not in doc


def test_coeffs_includes_xy_trio_at_j0_zero(capsys):
    code, out, _ = run_cli(capsys, ["coeffs", "--j0", "0", "--j", "1", "--beta", str(math.log(2))])
    assert code == 0
    doc = json.loads(out)
    assert doc["r1"] == pytest.approx(9 / 16)
    assert doc["r2"] == pytest.approx(3 / 8)


def test_solve_ordered_point(capsys):
    code, out, _ = run_cli(capsys, ["solve", "--j0", "1", "--j", "0.5", "--beta", "0.8"])
    assert code == 0
    doc = json.loads(out)
    assert doc["classification"] == "PhaseTransition"
    assert [b["branch"] for b in doc["branches"]] == ["disordered", "plus", "minus"]
    for b in doc["branches"]:
        assert b["residual"] < 1e-10


def test_solve_unique_point(capsys):
    code, out, _ = run_cli(capsys, ["solve", "--j0", "0.1", "--j", "0", "--beta", "0.1"])
    assert code == 0
    doc = json.loads(out)
    assert doc["classification"] == "Unique"
    assert [b["branch"] for b in doc["branches"]] == ["disordered"]


def test_solve_xy_point_reports_alpha_check(capsys):
    code, out, _ = run_cli(capsys, ["solve", "--j0", "0", "--j", "1", "--beta", "0.7"])
    assert code == 0
    doc = json.loads(out)
    assert doc["classification"] == "Unique"
    assert doc["branches"][0]["branch"] == "xy"
    assert doc["alpha_check"]["matches"] is False


def test_solve_singular_exits_2(capsys):
    code, _, err = run_cli(capsys, ["solve", "--j0", "1", "--j", "1", "--beta", "0.5"])
    assert code == 2
    assert "domain error" in err


def test_usage_error_exits_64(capsys):
    code, _, _ = run_cli(capsys, ["bogus"])
    assert code == 64
    code, _, _ = run_cli(capsys, ["solve", "--j0", "1"])
    assert code == 64


def test_resource_error_maps_to_3(capsys, monkeypatch):
    from cayley_qmc.errors import ResourceLimitError

    def boom(args):
        raise ResourceLimitError("too big")

    monkeypatch.setitem(cli._COMMANDS, "coeffs", boom)
    code, _, err = run_cli(capsys, ["coeffs", "--j0", "1", "--j", "0", "--beta", "1"])
    assert code == 3
    assert "resource limit" in err


def test_evaluate_identity(tmp_path, capsys):
    path = tmp_path / "obs.json"
    path.write_text(json.dumps({"terms": [{"coeff": [1.0, 0.0], "factors": []}]}))
    code, out, _ = run_cli(
        capsys,
        ["evaluate", "--observable", str(path), "--branch", "plus", "--j0", "1", "--j", "0.5", "--beta", "0.8"],
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["value"][0] == pytest.approx(1.0, abs=1e-12)
    assert doc["value"][1] == pytest.approx(0.0, abs=1e-12)


def test_evaluate_pauli_factor(tmp_path, capsys):
    path = tmp_path / "obs.json"
    path.write_text(
        json.dumps({"terms": [{"coeff": [1.0, 0.0], "factors": [{"site": [1, 1], "pauli": "Z"}]}]})
    )
    code, out, _ = run_cli(
        capsys,
        ["evaluate", "--observable", str(path), "--branch", "minus", "--j0", "1", "--j", "0", "--beta", "1"],
    )
    assert code == 0
    assert json.loads(out)["value"][0] < 0  # minus branch favours spin down


def test_evaluate_missing_file_exits_2(capsys):
    code, _, _ = run_cli(
        capsys, ["evaluate", "--observable", "/no/such.json", "--branch", "plus", "--j0", "1", "--j", "0", "--beta", "1"]
    )
    assert code == 2


def test_phase_diagram_csv(capsys):
    argv = [
        "phase-diagram",
        "--j-min", "-1", "--j-max", "1",
        "--j0-min", "0.2", "--j0-max", "1.2",
        "--beta", "1", "--resolution", "4",
    ]
    code, out, _ = run_cli(capsys, argv)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "j,j0,delta,classification,threshold"
    assert len(lines) == 17


def test_phase_diagram_deterministic(capsys):
    argv = [
        "phase-diagram",
        "--j-min", "-1", "--j-max", "1",
        "--j0-min", "0.2", "--j0-max", "1.2",
        "--beta", "1", "--resolution", "4",
    ]
    _, first, _ = run_cli(capsys, argv)
    _, second, _ = run_cli(capsys, argv)
    assert first == second


def test_projector_csv(capsys):
    argv = ["projector", "--j0", "1", "--j", "0.3", "--n", "3", "--beta-min", "1", "--beta-max", "3", "--steps", "3"]
    code, out, _ = run_cli(capsys, argv)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "beta,phi1_pn,phi1_qn,dev_from_one"
    assert len(lines) == 4


def test_cluster_json(capsys):
    argv = ["cluster", "--j0", "1", "--j", "0", "--beta", "1", "--branch", "plus", "--max-level", "5", "--format", "json"]
    code, out, _ = run_cli(capsys, argv)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["fitted_ratio"] - doc["lambda_abs"]) / doc["lambda_abs"] < 0.1
    assert [r["level"] for r in doc["rows"]] == [3, 4, 5]


def test_out_flag_writes_file(tmp_path, capsys):
    target = tmp_path / "coeffs.json"
    code, out, _ = run_cli(capsys, ["coeffs", "--j0", "1", "--j", "0", "--beta", "1", "--out", str(target)])
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["c1"] > 0


def test_verify_table_and_exit(capsys, monkeypatch):
    canned = [
        acceptance.CriterionResult(name="1 demo", passed=True, detail="ok"),
        acceptance.CriterionResult(name="2 demo", passed=True, detail="ok"),
    ]
    monkeypatch.setattr(acceptance, "run_all", lambda: canned)
    code, out, _ = run_cli(capsys, ["verify"])
    assert code == 0
    assert "PASS  1 demo" in out and "passed 2/2 criteria" in out

    canned[1] = acceptance.CriterionResult(name="2 demo", passed=False, detail="bad")
    code, out, _ = run_cli(capsys, ["verify"])
    assert code == 1
    assert "FAIL  2 demo" in out


def test_json_rendering_17g():
    text = cli.render_json({"x": 1 / 3, "nested": [1.0, 2]})
    assert "0.33333333333333331" in text
    parsed = json.loads(text)
    assert parsed["x"] == 1 / 3
    assert cli.render_json(float("nan")) == "null"
