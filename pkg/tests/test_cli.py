import json

import numpy as np


from covcat import linalg as la
from covcat import serialize as ser
from covcat import symmetry as sym
from covcat.catalysis import generate_admissible_scenario
from covcat.cli import main



def run_cli(args):
    return main(args)


def read_report(path):
    with open(path) as fh:
        return json.load(fh)


def test_demo_appendix_passes(tmp_path, capsys):
    out = str(tmp_path / "report.json")
    code = run_cli(["demo-appendix", "--output", out])
    assert code == 0
    report = read_report(out)
    assert report["passed"]
    assert abs(report["result"]["gap"] - 2 * np.sqrt(3)) < 1e-9
    assert report["result"]["triple_verdict"]["word"] == "x0 x1 x2"
    for pair in report["result"]["pairwise"].values():
        assert pair["success"] and pair["residual"] < 1e-6
    assert report["result"]["tensored_9x9"]["residual"] < 1e-6
    shown = capsys.readouterr().out
    assert "trace gap" in shown and "SUCCESS" in shown


def test_demo_finite_group_passes(tmp_path):
    out = str(tmp_path / "report.json")
    assert run_cli(["demo-finite-group", "--output", out]) == 0
    report = read_report(out)
    assert report["passed"]
    assert report["result"]["Z2"]["state_swap_covariant"]
    assert report["result"]["S3"]["covariant"]


def test_wiegmann_equiv_identical_tuples(tmp_path, rng):
    mats = [la.random_hermitian(3, rng) for _ in range(2)]
    problem = {"tuple_a": [ser.matrix_to_json(m) for m in mats],
               "tuple_b": [ser.matrix_to_json(m) for m in mats],
               "config": {"num_random_words": 20}}
    inp = tmp_path / "problem.json"
    inp.write_text(json.dumps(problem))
    out = str(tmp_path / "report.json")
    assert run_cli(["wiegmann-equiv", "--input", str(inp), "--output", out]) == 0
    report = read_report(out)
    assert report["result"]["verdict"] == "equivalent-up-to-bound"


def test_check_covariance_lie(tmp_path, rng):
    u = np.diag(np.exp(1j * np.arange(3)))
    problem = {
        "channel": {"d_in": 3, "d_out": 3, "kraus": [ser.matrix_to_json(u)]},
        "rep_in": {"type": "lie", "generators": [ser.matrix_to_json(np.diag([0.0, 1.0, 2.0]))]},
        "rep_out": {"type": "lie", "generators": [ser.matrix_to_json(np.diag([0.0, 1.0, 2.0]))]},
    }
    inp = tmp_path / "cov.json"
    inp.write_text(json.dumps(problem))
    out = str(tmp_path / "report.json")
    assert run_cli(["check-covariance", "--input", str(inp), "--output", out]) == 0
    assert read_report(out)["result"]["covariant"]


def test_check_covariance_failure_exit_code(tmp_path):
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    problem = {
        "channel": {"d_in": 2, "d_out": 2, "kraus": [ser.matrix_to_json(hadamard)]},
        "rep_in": {"type": "lie", "generators": [ser.matrix_to_json(np.diag([1.0, -1.0]))]},
        "rep_out": {"type": "lie", "generators": [ser.matrix_to_json(np.diag([1.0, -1.0]))]},
    }
    inp = tmp_path / "cov.json"
    inp.write_text(json.dumps(problem))
    assert run_cli(["check-covariance", "--input", str(inp),
                    "--output", str(tmp_path / "r.json")]) == 1


def test_malformed_input_exit_code(tmp_path):
    inp = tmp_path / "bad.json"
    inp.write_text(json.dumps({"tuple_a": [], "oops": 1}))
    assert run_cli(["wiegmann-equiv", "--input", str(inp)]) == 2
    inp2 = tmp_path / "notjson.json"
    inp2.write_text("{")
    assert run_cli(["wiegmann-equiv", "--input", str(inp2)]) == 2
    assert run_cli(["wiegmann-equiv", "--input", str(tmp_path / "missing.json")]) == 2


def test_find_intertwiner_and_catalysis_verify(tmp_path):
    sc = generate_admissible_scenario(2, 2, 1, seed=3)
    inp = tmp_path / "scenario.json"
    inp.write_text(json.dumps(sc.to_json()))
    out1 = str(tmp_path / "r1.json")
    assert run_cli(["find-intertwiner", "--input", str(inp), "--output", out1]) == 0
    r1 = read_report(out1)
    assert r1["result"]["intertwiner"]["success"]
    out2 = str(tmp_path / "r2.json")
    assert run_cli(["catalysis-verify", "--input", str(inp), "--output", out2]) == 0
    r2 = read_report(out2)
    assert r2["result"]["correlation"]["catalyst_preserved"]
    assert r2["result"]["scenario"]["admissible"]


def test_inadmissible_scenario_fails(tmp_path, rng):
    sc = generate_admissible_scenario(2, 2, 1, seed=3)
    payload = sc.to_json()
    payload["rho_s_out"] = ser.matrix_to_json(la.random_density(2, rng))
    inp = tmp_path / "broken.json"
    inp.write_text(json.dumps(payload))
    assert run_cli(["catalysis-verify", "--input", str(inp)]) == 1


def test_solver_failure_exit_code(tmp_path, rng):
    # admissibility tolerance loosened so an unsolvable instance reaches the
    # solver: exit 3 marks solver non-convergence, with the report emitted
    sc = generate_admissible_scenario(2, 2, 0, seed=1)
    payload = sc.to_json()
    payload["rho_s_out"] = ser.matrix_to_json(la.random_density(2, rng))
    payload["tolerances"]["admissibility"] = 10.0
    inp = tmp_path / "unsolvable.json"
    inp.write_text(json.dumps(payload))
    out = str(tmp_path / "r.json")
    assert run_cli(["find-intertwiner", "--input", str(inp), "--output", out]) == 3
    report = read_report(out)
    assert not report["result"]["intertwiner"]["success"]
    assert "diagnostic_scenario" in report["result"]["intertwiner"]


def test_recovery_verify_builtin(tmp_path):
    out = str(tmp_path / "rec.json")
    code = run_cli(["recovery-verify", "--N", "4", "--samples", "15", "--output", out])
    assert code == 0
    report = read_report(out)
    assert report["passed"]
    res = report["result"]["report"]
    assert res["worst_distance"] <= res["bound"] + 1e-5


def test_refframe_sweep_csv(tmp_path):
    out = str(tmp_path / "sweep.csv")
    code = run_cli(["refframe-sweep", "--Ns", "2,4", "--theta", "1.5707963",
                    "--samples", "10", "--output", out])
    assert code == 0
    lines = open(out).read().strip().split("\n")
    assert lines[0] == "N,theta,epsilon,bound,worst_distance,mean_distance,status"
    assert len(lines) == 3
    for line in lines[1:]:
        fields = line.split(",")
        assert float(fields[4]) <= float(fields[3])
        assert fields[6] == "ok"


def test_reports_byte_identical_modulo_metadata(tmp_path, rng):
    mats = [la.random_hermitian(2, rng) for _ in range(2)]
    problem = {"tuple_a": [ser.matrix_to_json(m) for m in mats],
               "tuple_b": [ser.matrix_to_json(m) for m in mats],
               "config": {"num_random_words": 10}}
    inp = tmp_path / "p.json"
    inp.write_text(json.dumps(problem))
    outs = []
    for name in ("a.json", "b.json"):
        out = str(tmp_path / name)
        assert run_cli(["wiegmann-equiv", "--input", str(inp), "--seed", "4",
                        "--output", out]) == 0
        report = read_report(out)
        report.pop("metadata")
        outs.append(json.dumps(report, sort_keys=True))
    assert outs[0] == outs[1]
