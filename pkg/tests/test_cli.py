import io
import json
import subprocess
import sys

import pytest

from hmlab.cli import main

EX1 = ["--theta", "quad:1,-1/2,2", "--alpha", "quad:1,-1/2,2"]


def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_no_arguments_is_usage_error(capsys):
    code, _ = run([])
    assert code == 2
    err = capsys.readouterr().err
    assert "usage" in err and "repro-example1" in err


def test_rational_theta_rejected():
    assert run(["cf", "--theta", "rat:1/3"])[0] == 2


@pytest.mark.parametrize("argv", [
    ["sparsity", "--bogus"],
    ["seq", "--theta", "quad:1,2"],
    ["seq", "--window", "5:1"],
    ["eval", "--beta", "rat:1/2"],
    ["sparsity", "--n", "2", "--n-range", "2:3"],
    ["witness", "--n-range", "2:6"],  # default window too small for rho*r_n
])
def test_bad_input_exit_2(argv):
    assert run(argv)[0] == 2


def test_sparsity_invocation_from_quad_grammar():
    code, out = run(["sparsity", *EX1, "--poly", "0,1", "--n", "2", "--window", "0:70"])
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == "hm-lab/1"
    assert [m for m, _ in rep["slices"][0]["entries"]] == [9, 16, 26, 33, 50, 57, 67]


def test_repro_worked_example():
    code, out = run(["repro-example1"])
    rep = json.loads(out)
    assert code == 0 and rep["match"]
    assert rep["nonzero_sets"] == {"2": [9, 16, 26, 33, 50, 57, 67], "3": [23, 40, 64], "4": [57]}


def test_condition_star_passes():
    code, out = run(["condition-star", *EX1, "--window", "0:2000", "--n-range", "2:6"])
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert all(p["gap"]["pass"] for p in rep["per_n"])
    assert rep["variation"]["c"] == "1/2"


def test_condition_star_tie_is_undecided():
    # alpha = 1 - {7 theta} puts an exact tie at m = 0 for r = 7
    code, _ = run(["condition-star", "--alpha", "quad:-4,7/2,2", "--n", "2", "--window", "0:200"])
    assert code == 3


def test_witness_pass_and_wrong_rho():
    assert run(["witness", *EX1, "--window", "0:5000", "--n-range", "2:6"])[0] == 0
    code, out = run(["witness", *EX1, "--window", "0:5000", "--n-range", "2:6", "--rho", "1"])
    assert code == 1
    rep = json.loads(out)
    assert any(not r["rho_step_ok"] for r in rep["records"])


def test_eval_and_relation():
    code, out = run(["eval", "--precision", "64"])
    assert code == 0 and json.loads(out)["precision"] == 64
    code, out = run(["relation", "--x", "quad:1/2,1/2,5", "--degree", "2", "--height", "100"])
    assert code == 0 and json.loads(out)["coefficients"] == [-1, -1, 1]
    code, out = run(["relation", "--precision", "256", "--degree", "4", "--height", "1000000"])
    assert code == 0 and json.loads(out)["outcome"] == "no_relation"
    assert run(["relation", "--x", "quad:0,1,7", "--degree", "4", "--height", "2", "--precision", "16"])[0] == 3


def test_cf_command():
    code, out = run(["cf", "--theta", "quad:1,-1/2,2", "--count", "12", "--mode", "bounded"])
    rep = json.loads(out)
    assert code == 0 and rep["table_ok"] and rep["best_approx"]["pass"]
    assert rep["selection"]["shifts"][:2] == [7, 41]
    code, out = run(["cf", "--theta", "quad:1,-1/2,2", "--count", "6", "--format", "csv"])
    assert code == 0 and out.splitlines()[0].startswith("n,")


def test_selection_shifts():
    code, out = run(["sparsity", "--shifts", "selection", "--mode", "bounded", "--n", "1", "--window", "0:70"])
    rep = json.loads(out)
    assert code == 0 and rep["slices"][0]["r"] == 7


def test_csv_outputs():
    code, out = run(["seq", "--window", "0:9", "--format", "csv"])
    rows = out.strip().splitlines()
    assert code == 0 and rows[0] == "m,floor,u" and [r.split(",")[2] for r in rows[1:]] == list("0001112222")
    code, out = run(["witness", "--window", "0:5000", "--n-range", "2:6", "--format", "csv"])
    assert code == 0 and len(out.strip().splitlines()) == 6


@pytest.mark.parametrize("argv", [
    ["cf", "--theta", "quad:0,1,3", "--count", "15"],
    ["seq", "--window", "0:300"],
    ["sparsity", "--n-range", "2:4", "--window", "0:500"],
    ["condition-star", "--n-range", "2:4", "--window", "0:800"],
    ["eval", "--precision", "200", "--beta", "quad:1,1,2"],
    ["repro-example1", "--format", "csv"],
])
def test_determinism(argv):
    assert run(argv) == run(argv)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "hmlab", "repro-example1"], capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["match"]
    again = subprocess.run([sys.executable, "-m", "hmlab", "repro-example1"], capture_output=True, text=True)
    assert again.stdout == res.stdout
