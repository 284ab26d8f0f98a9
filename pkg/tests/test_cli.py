"""Command-line interface."""

import json
import subprocess
import sys

import pytest

from ltlab.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_shifts(capsys):
    code, out, _ = run(capsys, "shifts", "--p", "3", "--n", "2", "--k", "2", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "ltlab/1"
    assert (doc["bc_shift"], doc["alg_shift"]) == (650, 644)


def test_moore(capsys):
    code, out, _ = run(capsys, "moore", "--p", "3", "--k", "2", "--s", "1", "--json")
    doc = json.loads(out)
    assert doc["fixture"]["discrepancy"] == 48 and doc["net"] == 644


def test_anss(capsys):
    code, out, _ = run(capsys, "anss", "hyp", "--p", "3", "--n", "2", "--json")
    assert json.loads(out)["details"]["holds"] is False
    code, out, _ = run(capsys, "anss", "torsion", "--p", "3", "--two-t", "12", "--json")
    assert json.loads(out)["details"]["bound"] == 9
    code, out, err = run(capsys, "anss", "torsion", "--p", "3", "--two-t", "5", "--json")
    assert code == 2 and json.loads(out)["error"] == "odd_input"
    code, out, _ = run(capsys, "anss", "sparse", "--p", "5", "--t", "3")
    assert "FORCED-ZERO" in out


def test_det_zeta_zn(capsys):
    code, out, _ = run(capsys, "det", "--p", "3", "--n", "2", "--g", "1; 1", "--json")
    assert json.loads(out)["det_int"] == 79
    code, out, _ = run(capsys, "zeta", "--p", "3", "--n", "2", "--k", "4", "--g", "1; 1", "--json")
    assert json.loads(out)["zeta"] == 8
    code, out, _ = run(capsys, "zn", "--p", "3", "--n", "2", "--json")
    doc = json.loads(out)
    assert doc["alpha"]["additive_order"] == 8 and doc["lambda"]["additive_order"] == 2


def test_t0_act_fixture(capsys, tmp_path):
    path = tmp_path / "fx.json"
    code, out, _ = run(capsys, "act", "--p", "3", "--n", "2", "--g", "1; 1", "--json", "--emit-fixture", str(path))
    doc = json.loads(out)
    assert code == 0 and doc["residual"]["m_order"] == 3
    fx = json.loads(path.read_text())
    assert fx["schema"] == "ltlab/1" and fx["result"]["t0"] == doc["t0"]
    code, out, _ = run(capsys, "t0", "--p", "3", "--n", "2", "--g", "2")
    assert "t_0(g) = 2" in out


def test_verify_deterministic(capsys):
    code, a, _ = run(capsys, "verify", "--p", "3", "--n", "2", "--trials", "3", "--seed", "1", "--json")
    code2, b, _ = run(capsys, "verify", "--p", "3", "--n", "2", "--trials", "3", "--seed", "1", "--json")
    assert code == code2 == 0 and a == b
    summary = json.loads(a.strip().splitlines()[-1])
    assert summary["all_pass"] and summary["checks"] == 9


def test_usage_errors(capsys):
    code, out, err = run(capsys, "det", "--p", "3", "--n", "2", "--g", "1;; 1", "--json")
    assert code == 2
    doc = json.loads(out)
    assert doc["error"] == "parse_error" and doc["position"] == 2
    assert run(capsys, "t0", "--p", "3", "--n", "3", "--g", "1")[0] == 2
    assert run(capsys, "det", "--p", "15", "--n", "2", "--g", "1")[0] == 2
    assert run(capsys, "t0", "--p", "3", "--n", "2", "--j", "5", "--g", "1")[0] == 2
    assert run(capsys, "t0", "--p", "3", "--n", "2", "--N", "500", "--g", "1")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 2


def test_not_a_unit_is_usage_error(capsys):
    code, out, _ = run(capsys, "zeta", "--p", "3", "--n", "2", "--g", "0; 1", "--json")
    assert code == 2 and json.loads(out)["error"] == "not_a_unit"


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "ltlab.cli", "shifts", "--p", "3", "--n", "2", "--k", "2"],
                       capture_output=True, text=True, check=True)
    assert "bc_shift = 650" in r.stdout


def test_post_check_failure_exit_code(capsys, monkeypatch):
    from ltlab import cli
    from ltlab.errors import PostCheckFailure

    def boom(cfg, out):
        out.doc("partial", {}, "partial output")
        raise PostCheckFailure("synthetic")

    monkeypatch.setitem(cli.COMMANDS, "shifts", boom)
    code, out, err = run(capsys, "shifts", "--p", "3", "--json")
    assert code == 3
    docs = [json.loads(line) for line in out.splitlines()]
    assert docs == [{"schema": "ltlab/1", "error": "post_check_failure", "message": "synthetic"}]
