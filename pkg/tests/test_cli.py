import csv
import io
import json
import math
import subprocess
import sys

import pytest

from dobrushin_lab.cli import EXIT_ERROR, EXIT_HYPOTHESIS, EXIT_OK, main


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_bounds_eval_generic(capsys):
    assert main(["bounds", "eval", "STAR_UPPER", "-p", "a=1", "-p", "mean_g=100", "--t", "0,20"]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0] == ["t", "bound"]
    assert float(out[1][1]) == 1.0
    assert float(out[2][1]) == pytest.approx(math.exp(-400 / 240))


def test_bounds_eval_application_grid(capsys):
    assert main(["bounds", "eval", "CW_UP", "-p", "beta=0.5", "-p", "h=0", "-p", "n=100",
                 "--t-grid", "0", "0.4", "3"]) == 0
    out = rows(capsys.readouterr().out)
    assert [float(r[0]) for r in out[1:]] == [0.0, 0.2, 0.4]
    assert float(out[2][1]) == pytest.approx(math.exp(-100 * 0.5 * 0.04 / (16 * 1.8)))


def test_bounds_eval_mgf_and_bernstein(capsys):
    assert main(["bounds", "eval", "MGF_STAR", "-p", "a=1", "-p", "mean_g=100", "--t", "0.25"]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0] == ["theta", "log_mgf_bound"]
    assert float(out[1][1]) == pytest.approx(100 * 0.0625 / 1.5)
    assert main(["bounds", "eval", "BERNSTEIN", "-p", "D=2", "-p", "C=1", "--t", "2"]) == 0
    assert float(rows(capsys.readouterr().out)[1][1]) == pytest.approx(math.exp(-0.5))


def test_bounds_eval_errors(capsys):
    assert main(["bounds", "eval", "TSP", "-p", "rho=1.5", "-p", "C_cost=1", "--t", "1"]) == EXIT_ERROR
    assert "rho" in capsys.readouterr().err
    assert main(["bounds", "eval", "NOPE", "--t", "1"]) == EXIT_ERROR


def test_bounds_constants(capsys):
    assert main(["bounds", "constants"]) == 0
    out = dict(r[:2] for r in rows(capsys.readouterr().out)[1:])
    assert 0.285 < float(out["a_c"]) < 0.286
    assert out["check_tsp"].endswith("pass")
    assert out["check_steiner"].endswith("pass")
    assert out["check_swr_tsp"].endswith("pass")


def test_dobrushin_compute(tmp_path, capsys):
    path = tmp_path / "a.csv"
    assert main(["dobrushin", "compute", "--model", "cw", "--n", "4", "--beta", "0.5", "--exact",
                 "--out", str(path)]) == 0
    assert main(["dobrushin", "compute", "--model", "csv", "--matrix", str(path)]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0] == ["n", "norm_1", "norm_inf", "norm_2"]
    assert float(out[1][1]) <= 0.5 * 0.75 + 1e-12
    assert main(["dobrushin", "compute", "--model", "swr", "--N", "5", "--n", "2"]) == 0
    assert "rho=0.5" in capsys.readouterr().err
    assert main(["dobrushin", "compute", "--model", "cw", "--n", "4", "--beta", "2.0",
                 "--strict"]) == EXIT_HYPOTHESIS


def test_selfbound_verify(capsys):
    assert main(["selfbound", "verify", "--function", "n_minus", "--n", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["holds"] is True
    assert main(["selfbound", "verify", "--function", "triangle", "--n", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["holds"] is True
    assert main(["selfbound", "verify", "--function", "ones", "--n", "3", "--a", "0.5",
                 "--strict"]) == EXIT_HYPOTHESIS
    assert json.loads(capsys.readouterr().out)["holds"] is False


def test_simulate_writes_all_outputs_and_is_seeded(tmp_path, capsys):
    prefix = str(tmp_path / "run")
    args = ["simulate", "cw", "-p", "n=20", "-p", "beta=0.4", "--t", "0.1,0.2",
            "--replicas", "300", "--seed", "9"]
    assert main(args + ["--out", prefix]) == 0
    for suffix in (".csv", ".plot.csv", ".meta.json", ".runtime.json"):
        assert (tmp_path / ("run" + suffix)).exists()
    assert main(args + ["--workers", "4"]) == 0
    assert capsys.readouterr().out == (tmp_path / "run.csv").read_text()
    assert main(["report", "render", "--csv", prefix + ".csv", "--meta", prefix + ".meta.json"]) == 0
    assert "CW_UP" in capsys.readouterr().out


def test_simulate_from_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"N": 12, "n": 4}, "thresholds": [1, 2], "replicas": 100,
                               "seed": 1}))
    assert main(["simulate", "SWR", "--config", str(cfg)]) == 0
    assert len(rows(capsys.readouterr().out)) == 1 + 2 * 2


def test_simulate_strict_hypothesis_violation(capsys):
    args = ["simulate", "CW", "-p", "n=20", "-p", "beta=1.5", "--t", "0.1", "--replicas", "50"]
    assert main(args) == EXIT_OK
    assert "hypothesis violated" in capsys.readouterr().err
    assert main(args + ["--strict"]) == EXIT_HYPOTHESIS


def test_convexdist_solve(tmp_path, capsys):
    inst = tmp_path / "i.json"
    inst.write_text(json.dumps({"x": [0, 0], "S": [[1, 0], [0, 1]]}))
    assert main(["convexdist", "solve", "--instance", str(inst)]) == 0
    out = rows(capsys.readouterr().out)
    assert float(out[1][0]) == pytest.approx(1 / math.sqrt(2))
    assert main(["convexdist", "solve", "--instance", str(tmp_path / "missing.json")]) == EXIT_ERROR


def test_coupling_run(capsys):
    assert main(["coupling", "run", "--n", "6", "--runs", "200", "--steps", "10"]) == 0
    out = rows(capsys.readouterr().out)
    assert out[0] == ["k", "mean_distance", "standard_error", "bound"]
    assert float(out[1][1]) == 6.0 and len(out) == 12


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dobrushin_lab", "bounds", "constants"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "a_c" in res.stdout
    res = subprocess.run([sys.executable, "-m", "dobrushin_lab", "bogus"], capture_output=True,
                         text=True, check=False)
    assert res.returncode != 0
