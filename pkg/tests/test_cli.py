import json
import subprocess
import sys

import pytest

from specrecover.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": 16, "m": 10, "s": 2, "min_separation": 0.2, "master_seed": 4, "trial": 1}))
    return path


def test_gen_solve_oracle_round_trip(tmp_path, config_file, capsys):
    inst = tmp_path / "inst.json"
    assert main(["gen", "--config", str(config_file), "--out", str(inst)]) == EXIT_OK
    doc = json.loads(inst.read_text())
    assert doc["n"] == 16 and len(doc["observed"]) == 10 and doc["trial"] == 1
    res = tmp_path / "res.json"
    assert main(["solve", "--instance", str(inst), "--p", "1", "--out", str(res)]) == EXIT_OK
    out = json.loads(res.read_text())
    assert 0 <= out["k"] <= 2 and sum(ln["known"] for ln in out["estimate"]) >= 1
    assert main(["oracle", "--instance", str(inst), "--grid", "256", "--tol", "1e-3"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["grid"] == 256 and report["grid_value"] >= report["grid_lower_bound"]


def test_gen_is_deterministic(tmp_path, config_file):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["gen", "--config", str(config_file), "--out", str(a)])
    main(["gen", "--config", str(config_file), "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(tmp_path, config_file):
    assert main(["gen", "--config", str(tmp_path / "missing.json")]) == EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 4, "m": 9, "s": 1}))
    assert main(["gen", "--config", str(bad)]) == EXIT_CONFIG
    bad.write_text("{not json")
    assert main(["gen", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["experiment", "--id", "7"]) == EXIT_CONFIG
    assert main(["experiment", "--id", "1", "--trials", "0", "--out", str(tmp_path / "e")]) == EXIT_CONFIG
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert main(["experiment", "--id", "1", "--trials", "1", "--out", str(blocker / "x")]) == EXIT_IO
    inst = tmp_path / "inst.json"
    main(["gen", "--config", str(config_file), "--out", str(inst)])
    assert main(["solve", "--instance", str(inst), "--p", "5"]) == EXIT_CONFIG
    assert main(["oracle", "--instance", str(inst), "--grid", "8"]) == EXIT_CONFIG


def test_experiment_command(tmp_path, capsys):
    out = tmp_path / "e1"
    assert main(["experiment", "--id", "1", "--trials", "2", "--seed", "3", "--threads", "1",
                 "--out", str(out)]) == EXIT_OK
    lines = (out / "trials.csv").read_text().splitlines()
    assert lines[0] == "trial,p,k,converged,objective,gap,ms" and len(lines) == 1 + 2 * 4
    assert (out / "summary.csv").read_text().startswith("p,k,count,probability\n")
    cfg = json.loads((out / "config.json").read_text())["config"]
    assert cfg["master_seed"] == 3 and cfg["trials"] == 2
    assert "P(k=s)" in capsys.readouterr().out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "specrecover.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("gen", "solve", "experiment"):
        assert cmd in proc.stdout
