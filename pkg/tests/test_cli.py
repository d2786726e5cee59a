"""End-to-end tests of the contractctl command line harness."""

import json
import subprocess
import sys

import pytest

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def run_cli(*args, env_extra=None, cwd=None):
    import os

    env = dict(os.environ)
    env.setdefault("MPLBACKEND", "Agg")
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "contractlab.cli", *args],
        capture_output=True,
        text=True,
        env=env,
        cwd=cwd,
    )


def test_report_run_exit_zero_and_layout(tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "run", "metric-scaling", "--out", str(out),
        "--t", "0.5,0.25,0.125", "--samples", "5",
    )
    assert proc.returncode == 0, proc.stderr
    assert "ok metric-scaling" in proc.stdout
    exp = out / "metric-scaling"
    payload = json.loads((exp / "report.json").read_text())
    for key in ("experiment", "params", "tValues", "errors", "fittedOrder",
                "passed", "gates", "minOrders", "seed", "buildStamp"):
        assert key in payload
    assert payload["experiment"] == "metric-scaling"
    assert payload["passed"] is True
    assert payload["tValues"] == [0.5, 0.25, 0.125]
    assert set(payload["errors"]) == {"identity", "origin"}
    assert all(len(v) == 3 for v in payload["errors"].values())
    lines = (exp / "errors.csv").read_text().splitlines()
    assert lines[0] == "t,identity,origin"
    assert len(lines) == 4
    png = (exp / "decay.png").read_bytes()
    assert png.startswith(PNG_MAGIC)


def test_unknown_experiment_exits_two(tmp_path):
    proc = run_cli("run", "nonsense", "--out", str(tmp_path / "out"))
    assert proc.returncode == 2
    assert "unknown experiment" in proc.stderr


def test_usage_errors_exit_two(tmp_path):
    out = str(tmp_path / "out")
    short = run_cli("run", "metric-scaling", "--out", out, "--t", "0.5")
    assert short.returncode == 2
    assert "at least 3" in short.stderr
    rising = run_cli("run", "metric-scaling", "--out", out,
                     "--t", "0.5,0.7,0.25")
    assert rising.returncode == 2
    assert "strictly decreasing" in rising.stderr
    bogus = run_cli("run", "metric-scaling", "--out", out,
                    "--t", "0.5,0.25,0.125", "--tolerance", "bogus=1")
    assert bogus.returncode == 2
    assert "not reported" in bogus.stderr
    threads = run_cli("run", "metric-scaling", "--out", out,
                      "--t", "0.5,0.25,0.125", "--samples", "5",
                      env_extra={"CONTRACTCTL_THREADS": "soon"})
    assert threads.returncode == 2
    assert "CONTRACTCTL_THREADS" in threads.stderr


def test_gate_failure_exits_one(tmp_path):
    proc = run_cli(
        "run", "metric-scaling", "--out", str(tmp_path / "out"),
        "--t", "0.5,0.25,0.125", "--samples", "5",
        "--tolerance", "identity=1e-30",
    )
    assert proc.returncode == 1
    assert "FAIL metric-scaling" in proc.stdout
    assert "identity" in proc.stdout
    payload = json.loads(
        (tmp_path / "out" / "metric-scaling" / "report.json").read_text()
    )
    assert payload["passed"] is False
    assert payload["gates"]["identity"] == 1e-30


def test_reports_are_byte_deterministic(tmp_path):
    args = ("run", "waves", "--t", "0.5,0.25,0.125", "--resolution", "17")
    first = run_cli(*args, "--out", str(tmp_path / "a"))
    second = run_cli(*args, "--out", str(tmp_path / "b"))
    assert first.returncode == 0 and second.returncode == 0
    for name in ("report.json", "errors.csv"):
        one = (tmp_path / "a" / "waves" / name).read_bytes()
        two = (tmp_path / "b" / "waves" / name).read_bytes()
        assert one == two


def test_config_file_applies_and_flags_win(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(
        "seed = 7\nresolution = 9\n\n[waves]\nrange = 1.0\n"
    )
    out = tmp_path / "out"
    proc = run_cli(
        "run", "waves", "--config", str(config), "--out", str(out),
        "--t", "0.5,0.25,0.125",
    )
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((out / "waves" / "report.json").read_text())
    assert payload["seed"] == 7
    assert payload["params"]["resolution"] == 9
    assert payload["params"]["range"] == 1.0
    out2 = tmp_path / "out2"
    proc2 = run_cli(
        "run", "waves", "--config", str(config), "--out", str(out2),
        "--t", "0.5,0.25,0.125", "--resolution", "17", "--seed", "3",
    )
    assert proc2.returncode == 0, proc2.stderr
    payload2 = json.loads((out2 / "waves" / "report.json").read_text())
    assert payload2["seed"] == 3
    assert payload2["params"]["resolution"] == 17
    missing = run_cli("run", "waves", "--config", str(tmp_path / "no.toml"),
                      "--out", str(out))
    assert missing.returncode == 2
    assert "cannot read config" in missing.stderr


def test_fan_out_under_thread_cap(tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "run", "metric-scaling,waves", "--out", str(out),
        "--t", "0.5,0.25,0.125", "--samples", "5", "--resolution", "17",
        env_extra={"CONTRACTCTL_THREADS": "2"},
    )
    assert proc.returncode == 0, proc.stderr
    assert "ok metric-scaling" in proc.stdout
    assert "ok waves" in proc.stdout
    for name in ("metric-scaling", "waves"):
        assert (out / name / "report.json").exists()
        assert (out / name / "decay.png").exists()


def test_principal_report_mirrors_error_arrays(tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "run", "principal", "--out", str(out), "--t", "0.5,0.25,0.125",
    )
    assert proc.returncode == 0, proc.stderr
    payload = json.loads((out / "principal" / "report.json").read_text())
    assert payload["l2Errors"] == payload["errors"]["l2"]
    assert payload["supErrors"] == payload["errors"]["sup"]


def test_figure_wave_outputs(tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "run", "figure-wave", "--out", str(out),
        "--t", "1.0", "--resolution", "33",
    )
    assert proc.returncode == 0, proc.stderr
    exp = out / "figure-wave"
    lines = (exp / "wave.csv").read_text().splitlines()
    assert lines[0] == "x,y,re,im"
    assert len(lines) == 33 * 33 + 1
    envelope = json.loads((exp / "wave.json").read_text())
    assert envelope == {"lambda": 30.0, "t": 1.0, "range": 1.5,
                        "resolution": 33}
    assert (exp / "wave.png").read_bytes().startswith(PNG_MAGIC)


def test_figure_orbit_outputs_and_negative_t_rejected(tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "run", "figure-orbit", "--out", str(out), "--t", "1.0,0.5,0.0",
    )
    assert proc.returncode == 0, proc.stderr
    exp = out / "figure-orbit"
    lines = (exp / "orbit.csv").read_text().splitlines()
    assert lines[0] == "t,index,k,a1,a2"
    payload = json.loads((exp / "orbit.json").read_text())
    assert payload["tValues"] == [1.0, 0.5, 0.0]
    assert (exp / "orbit.png").read_bytes().startswith(PNG_MAGIC)
    bad = run_cli("run", "figure-orbit", "--out", str(out), "--t", "-1.0")
    assert bad.returncode == 2
    assert "non-negative" in bad.stderr


def test_figure_wave_sequence_outputs(tmp_path):
    out = tmp_path / "out"
    proc = run_cli(
        "run", "figure-wave-sequence", "--out", str(out),
        "--t", "1.0,0.5", "--resolution", "17",
    )
    assert proc.returncode == 0, proc.stderr
    exp = out / "figure-wave-sequence"
    for i in range(2):
        lines = (exp / f"frame_{i}.csv").read_text().splitlines()
        assert lines[0] == "x,y,re,im"
        assert len(lines) == 17 * 17 + 1
    payload = json.loads((exp / "sequence.json").read_text())
    assert [frame["t"] for frame in payload["frames"]] == [1.0, 0.5]
    assert (exp / "sequence.png").read_bytes().startswith(PNG_MAGIC)
