import csv
import json
import subprocess
import sys

import pytest

from billiard_homotopy.cli import dispatch


def run(tmp_path, *args):
    return dispatch([*args, "--out", str(tmp_path)])


def test_simulate_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(a, "simulate", "--seed", "7", "--T", "5") == 0
    assert run(b, "simulate", "--seed", "7", "--T", "5") == 0
    assert (a / "trajectory.json").read_bytes() == (b / "trajectory.json").read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["seed"] == 7


def test_turns_csv(tmp_path):
    assert run(tmp_path, "turns") == 0
    with open(tmp_path / "turns.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 17
    assert max(rows, key=lambda r: float(r["computed"]))["turn"] == "bc"


def test_growth_and_state_cap(tmp_path):
    assert run(tmp_path, "growth", "--radius", "6") == 0
    assert (tmp_path / "ball.csv").exists()
    assert run(tmp_path / "cap", "growth", "--radius", "6", "--state-cap", "50") == 3


def test_config_supplies_defaults_and_flags_win(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("word = bc\ninflate = 0.01\n")
    assert run(tmp_path / "c", "minimize", "--config", str(cfg)) == 0
    assert (tmp_path / "c" / "inflated.json").exists()
    assert run(tmp_path / "d", "minimize", "--config", str(cfg), "--word", "ab") == 0
    sol = json.loads((tmp_path / "d" / "solution.json").read_text())
    assert "ab" in json.dumps(sol)
    cfg.write_text("bogus = 1\n")
    assert run(tmp_path / "e", "minimize", "--config", str(cfg), "--word", "ab") == 2


def test_usage_errors(tmp_path):
    assert run(tmp_path, "frobnicate") == 2
    assert run(tmp_path, "minimize", "--word", "aA") == 2
    assert run(tmp_path, "simulate", "--r0", "0.3") == 2


def test_periodic_and_entropy(tmp_path):
    assert run(tmp_path, "periodic", "--word", "b") == 0
    data = json.loads((tmp_path / "periodic.json").read_text())
    assert data
    assert run(tmp_path / "e", "entropy", "--word-cap", "3", "--T-values", "1,2,4") == 0
    assert (tmp_path / "e" / "entropy.csv").exists()


def test_verify_single_check(tmp_path):
    assert run(tmp_path, "verify-all", "--only", "2") == 0
    data = json.loads((tmp_path / "acceptance.json").read_text())
    assert "bc" in json.dumps(data)


@pytest.mark.parametrize("args,code", [(["--help"], 0), (["turns", "--seed", "x"], 2)])
def test_console_entry_point(tmp_path, args, code):
    proc = subprocess.run([sys.executable, "-m", "billiard_homotopy.cli", *args, "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == code
