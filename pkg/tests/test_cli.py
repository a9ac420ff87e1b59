from __future__ import annotations

import json

import pytest

from semirps import checks
from semirps.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_constants(capsys):
    code, out = run(capsys, "constants")
    data = json.loads(out)
    assert code == 0 and data["mean"] == 1.46580754 and data["win_prob"] == 0.0646770326


def test_solve_n1(capsys):
    code, out = run(capsys, "solve", "--n", "1")
    assert code == 0 and json.loads(out) == {"n": 1, "value": 1.33333333, "value_over_sqrt_n": 1.33333333}


def test_solve_table_out(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, _ = run(capsys, "solve", "--n", "2", "--table-out", str(path))
    assert code == 0 and path.read_text().startswith("a,b,c,value")


def test_simulate_cyclic(capsys, tmp_path):
    path = tmp_path / "g.csv"
    code, out = run(capsys, "simulate", "--n", "100", "--games", "1000", "--r", "cyclic-r",
                    "--nn", "greedy-n", "--seed", "7", "--out", str(path))
    data = json.loads(out)
    assert code == 0 and abs(data["mean"] - 4 / 3) <= 4 * data["se"]
    assert data["config"]["master_seed"] == 7 and data["mean_t1"] == 298.0
    for key in ("var", "p_r_wins", "p_draw", "mean_t2", "esn_gap", "t1_scaling", "l1_residual_scaled", "ks_vs_limit"):
        assert key in data
    assert len(path.read_text().splitlines()) == 1001


def test_simulate_reproducible(capsys):
    argv = ("simulate", "--n", "30", "--games", "500", "--r", "greedy-r", "--nn", "uniform-n", "--seed", "3")
    assert run(capsys, *argv) == run(capsys, *argv, "--threads", "2")


def test_limit_sample(capsys):
    code, out = run(capsys, "limit-sample", "--rep", "erock", "--count", "2000", "--seed", "1", "--summary")
    data = json.loads(out)
    assert code == 0 and data["rep"] == "EROCK" and abs(data["p_zero_atom"] - 1 / 3) < 0.05
    code, out = run(capsys, "limit-sample", "--rep", "D", "--count", "4", "--seed", "1")
    assert len(out.split()) == 4 and all(float(v) == float(v) for v in out.split())


@pytest.mark.parametrize("argv", [
    ["solve", "--n", "0"],
    ["solve", "--n", "2001"],
    ["solve", "--n", "5", "--bogus"],
    ["simulate", "--n", "5", "--games", "10", "--r", "greedy-n", "--nn", "greedy-n", "--seed", "1"],
    ["simulate", "--n", "5", "--games", "10", "--r", "greedy-r", "--nn", "greedy-n", "--seed", "-1"],
    ["limit-sample", "--rep", "Q", "--count", "3", "--seed", "1"],
    ["verify", "--level", "medium", "--seed", "0"],
    [],
])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_verify_exit_status(capsys, monkeypatch):
    passing = checks.CheckResult(1, "ok", [checks.SubCheck("a", True, 1.0)])
    failing = checks.CheckResult(2, "bad", [checks.SubCheck("b", False, 0.0)])
    monkeypatch.setattr(checks, "run_all", lambda level, seed, on_result=None: [passing])
    assert run(capsys, "verify", "--seed", "0")[0] == 0
    monkeypatch.setattr(checks, "run_all", lambda level, seed, on_result=None: [passing, failing])
    code, out = run(capsys, "verify", "--seed", "0")
    assert code == 1 and json.loads(out)["passed"] is False
