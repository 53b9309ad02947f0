import csv
import json
import math

import pytest

from shrinklab.cli import main


def run(args):
    return main(args)


def test_star_command_rotation_map(tmp_path, capsys):
    assert run(["star", "--map", "x2;-x1", "--at", "1,0",
                "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "*eta1" in out
    payload = json.loads((tmp_path / "star.json").read_text())
    assert payload["stars"]["eta1"] == pytest.approx(0.5, abs=1e-14)
    assert payload["stars"]["eta2"] == pytest.approx(0.5, abs=1e-14)
    assert payload["stars"]["etaP"] == pytest.approx(1.0, abs=1e-14)
    assert payload["stars"]["etaPP"] == pytest.approx(0.0, abs=1e-14)
    assert payload["config_sha256"]


def test_svd_command_example(tmp_path):
    assert run(["svd", "--matrix", "3,0,0,4", "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "svd.json").read_text())
    assert payload["lambda1"] == pytest.approx(3.0)
    assert payload["lambda2"] == pytest.approx(4.0)
    assert payload["jacobian"] == pytest.approx(12.0)


def test_verify_quick_suite(tmp_path):
    assert run(["verify", "--suite", "quick", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "verify_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows and all(row["pass"] == "True" for row in rows)
    assert any(row["identity"] == "star_laplacian" for row in rows)
    lines = (tmp_path / "verify_residuals.jsonl").read_text().splitlines()
    record = json.loads(lines[0])
    assert {"name", "point", "abs_residual"} <= set(record)
    summary = json.loads((tmp_path / "verify_summary.json").read_text())
    assert summary["all_pass"] is True
    assert summary["config"]["suite"] == "quick"


def test_verify_deterministic_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["verify", "--suite", "quick", "--out", str(a)]) == 0
    assert run(["verify", "--suite", "quick", "--out", str(b)]) == 0
    ja = json.loads((a / "verify_summary.json").read_text())
    jb = json.loads((b / "verify_summary.json").read_text())
    ja.pop("timestamp")
    jb.pop("timestamp")
    assert json.dumps(ja, sort_keys=True) == json.dumps(jb, sort_keys=True)
    assert (a / "verify_residuals.jsonl").read_bytes() \
        == (b / "verify_residuals.jsonl").read_bytes()
    assert (a / "verify_summary.csv").read_bytes() \
        == (b / "verify_summary.csv").read_bytes()


def test_solve_command(tmp_path):
    assert run(["solve", "--n", "16", "--half-width", "2.0",
                "--boundary-map", "0,0,0,0", "--perturbation", "0.05",
                "--seed", "3", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "solve_report.json").read_text())
    assert report["report"]["converged"] is True
    with open(tmp_path / "solve_solution.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 17 * 17
    assert set(rows[0]) == {"x1", "x2", "f1", "f2"}


def test_growth_command(tmp_path):
    assert run(["growth", "--kind", "torus", "--radii", "3",
                "--resolution", "64", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "growth.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["area"]) == pytest.approx(8 * math.pi ** 2, abs=1e-6)


def test_chain_command(tmp_path):
    assert run(["chain", "--kind", "plane", "--r", "2", "--resolution", "64",
                "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "chain.json").read_text())
    assert all(q["holds"] for q in payload["report"]["inequalities"])
    assert "finite-sample" in payload["report"]["note"]


def test_probe_command(tmp_path):
    assert run(["probe", "--boundary-map", "0,0,0,0", "--seeds", "1",
                "--n", "12", "--half-width", "1.5", "--perturbation", "0.05",
                "--out", str(tmp_path)]) == 0
    payload = json.loads((tmp_path / "probe.json").read_text())
    assert payload["report"]["fraction_converged"] == 1.0
    assert payload["report"]["condition_sum_positive"] is True
    assert payload["report"]["condition_diff_positive"] is True


def test_exit_code_config_error(tmp_path):
    # malformed expression
    assert run(["star", "--map", "x1)(;x2", "--at", "0,1",
                "--out", str(tmp_path)]) == 2
    # malformed point
    assert run(["star", "--map", "x1;x2", "--at", "1,2,3",
                "--out", str(tmp_path)]) == 2
    # unknown config key
    assert run(["star", "--set", "star.bogus=1", "--out", str(tmp_path)]) == 2
    # mismatched section
    assert run(["star", "--set", "solve.n=3", "--out", str(tmp_path)]) == 2


def test_exit_code_precondition(tmp_path):
    # evaluation at a pole of the map
    assert run(["star", "--map", "1/x1;x2", "--at", "0,1",
                "--out", str(tmp_path)]) == 3
    # chain with a sign-violating g field
    assert run(["chain", "--kind", "plane", "--g", "x1", "--r", "2",
                "--resolution", "64", "--out", str(tmp_path)]) == 3


def test_exit_code_assertion_failure(tmp_path):
    # starve the solver so it cannot converge
    assert run(["solve", "--n", "16", "--half-width", "2.0",
                "--boundary-map", "0,0,0,0", "--perturbation", "0.3",
                "--max-iter", "1", "--out", str(tmp_path)]) == 1


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('[star]\nmap = "x1;x2"\nat = "0.5,0.5"\n')
    out = tmp_path / "out"
    assert run(["star", "--config", str(cfg), "--out", str(out)]) == 0
    payload = json.loads((out / "star.json").read_text())
    assert payload["config"]["map"] == "x1;x2"
    # --set overrides the file, flags override --set
    assert run(["star", "--config", str(cfg), "--set", "star.at=0,0",
                "--at", "1,0", "--map", "x2;-x1", "--out", str(out)]) == 0
    payload = json.loads((out / "star.json").read_text())
    assert payload["config"]["at"] == "1,0"
    assert payload["config"]["map"] == "x2;-x1"


def test_threads_flag_accepted(tmp_path):
    assert run(["svd", "--matrix", "1,0,0,1", "--threads", "4",
                "--out", str(tmp_path)]) == 0
    assert run(["svd", "--matrix", "1,0,0,1", "--threads", "0",
                "--out", str(tmp_path)]) == 2
