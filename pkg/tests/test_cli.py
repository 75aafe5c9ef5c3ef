import json
import subprocess
import sys

import pytest

from cavity_sse.cli import main

CFG = """scenario = angles
x0 = -2.5
n_traj = 6
n_periods = 3
grid_size = 32
steps_per_period = 40
"""


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CFG)
    return path


def summary(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_simulate_emit_resume(cfg, tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["simulate", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    s = summary(capsys)
    assert set(s) >= {"run_id", "wall_time", "manifest"}
    assert main(["emit", str(out), "--figure", "fig4"]) == 0
    assert (out / "fig4.csv").exists()
    capsys.readouterr()
    assert main(["resume", str(out)]) == 0
    assert summary(capsys)["manifest"] == s["manifest"]


def test_seed_override_changes_output(cfg, tmp_path, capsys):
    main(["simulate", str(cfg), "--out", str(tmp_path / "a"), "--seed", "1"])
    a = summary(capsys)
    main(["simulate", str(cfg), "--out", str(tmp_path / "b"), "--seed", "2"])
    assert summary(capsys)["manifest"] != a["manifest"]


def test_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("scenario = angles\nkbarr = 0.3\n")
    assert main(["simulate", str(bad)]) == 2
    assert "kbarr" in capsys.readouterr().err
    assert main(["simulate", str(tmp_path / "missing.cfg")]) == 2
    assert main(["emit", str(tmp_path), "--figure", "fig2"]) == 2


def test_corrupted_checkpoint_exit_code(cfg, tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["simulate", str(cfg), "--out", str(out), "--stop-after", "1"]) == 0
    ck = out / "checkpoint.npz"
    ck.write_bytes(ck.read_bytes()[:-3] + b"xyz")
    assert main(["resume", str(out)]) == 2
    assert "checksum" in capsys.readouterr().err


def test_numeric_failure_exit_code(tmp_path, capsys, monkeypatch):
    from cavity_sse import propagator
    cfg = tmp_path / "c.cfg"
    cfg.write_text(CFG)

    def explode(self, amps, t, dt, dW):
        return amps * float("nan")

    monkeypatch.setattr(propagator.SplitStepPropagator, "potential", explode)
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "r")]) == 3
    err = capsys.readouterr().err
    assert "trajectories" in err and "step" in err


def test_module_entry_point(cfg, tmp_path):
    res = subprocess.run([sys.executable, "-m", "cavity_sse", "simulate", str(cfg), "--out", str(tmp_path / "m")],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["kind"] == "angles"
