import subprocess
import sys

import pytest

from qrg_xy2d.cli import EXIT_CONFIG, EXIT_FAILED, EXIT_NUMERIC, EXIT_OK, RunConfig, ConfigError, main


def _run(tmp_path, *args, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out.read_text() if out.exists() else ""


def _data_rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


def test_verify_default_passes(tmp_path, capsys):
    code, text = _run(tmp_path, "verify")
    assert code == EXIT_OK
    lines = text.splitlines()
    assert lines[0] == "# qrg-xy2d v0.1"
    assert lines[1].startswith("# config: command=verify")
    header, rows = _data_rows(text)
    assert header == ["check", "gamma", "value", "tolerance", "passed"]
    assert all(r[-1] == "1" for r in rows)
    residual = next(ln for ln in lines if ln.startswith("# max_residual:"))
    assert float(residual.split(":")[1]) <= 1e-8
    assert "0 failed" in capsys.readouterr().err


def test_verify_unattainable_tolerance(tmp_path, capsys):
    code, text = _run(tmp_path, "verify", "--points", "5", "--tol", "1e-16")
    assert code == EXIT_FAILED
    err = capsys.readouterr().err
    assert "FAIL" in err and ("energy_rel_error" in err or "projector_distance" in err)


@pytest.mark.parametrize(
    "args",
    [
        ["verify", "--gamma-min", "1", "--gamma-max", "-1"],
        ["concurrence", "--points", "2"],
        ["flow", "--iterations", ""],
        ["derivative", "--fd-step", "0"],
        ["flow", "--iterations", "99"],
        ["concurrence", "--iterations", "a,b"],
        ["nonsense"],
    ],
)
def test_bad_config_exit_2(tmp_path, args):
    assert main([*args, "--out", str(tmp_path / "x.csv")] if args != ["nonsense"] else args) == EXIT_CONFIG


def test_svg_needs_path():
    assert main(["concurrence", "--points", "3", "--svg"]) == EXIT_CONFIG


def test_flow_rows(tmp_path):
    code, text = _run(tmp_path, "flow", "--gamma-min", "0", "--gamma-max", "1", "--points", "11", "--iterations", "4")
    assert code == EXIT_OK
    assert any(ln.startswith("# fixed_points:") for ln in text.splitlines())
    header, rows = _data_rows(text)
    assert header == ["gamma0", "n", "N", "gamma_n", "j_ratio_cumulative"]
    by_start = {}
    for g0, n, size, gn, _ in rows:
        by_start.setdefault(float(g0), []).append(float(gn))
        assert int(size) == 5 ** (int(n) + 1)
    assert all(g == 0.0 for g in by_start[0.0])
    assert all(g == pytest.approx(1.0, abs=1e-12) for g in by_start[1.0])
    traj = by_start[0.1]
    assert all(b >= a for a, b in zip(traj, traj[1:])) and traj[-1] == pytest.approx(1.0, abs=1e-9)


def test_concurrence_grid_shape(tmp_path):
    code, text = _run(tmp_path, "concurrence", "--svg")
    assert code == EXIT_OK
    header, rows = _data_rows(text)
    assert header == ["gamma", "cg_0", "cg_1", "cg_2"]
    assert len(rows) == 2001
    assert not text.endswith(",\n") and "\r" not in text
    svg = (tmp_path / "out.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 3


def test_derivative_peaks_metadata(tmp_path):
    code, text = _run(tmp_path, "derivative", "--points", "41", "--iterations", "0,2,4,6")
    assert code == EXIT_OK
    peaks = [ln for ln in text.splitlines() if ln.startswith("# peak:")]
    gm = [abs(float(ln.split("gamma_max=")[1].split()[0])) for ln in peaks]
    assert len(gm) == 4 and all(b < a for a, b in zip(gm, gm[1:]))


def test_derivative_grid_vs_step(tmp_path):
    code, _ = _run(tmp_path, "derivative", "--points", "5", "--gamma-min", "0", "--gamma-max", "1e-4")
    assert code == EXIT_CONFIG


def test_scaling_output(tmp_path):
    code, text = _run(tmp_path, "scaling")
    assert code == EXIT_OK
    header, rows = _data_rows(text)
    assert header == ["n", "N", "gamma_max", "d_max"]
    assert [r[0] for r in rows] == ["1", "2", "3", "4"]
    meta = {ln.split(":")[0][2:]: ln for ln in text.splitlines() if ln.startswith("#")}
    assert {"theta", "prefactor", "fit_ln_dmax", "fit_ln_gamma_distance"} <= set(meta)


def test_scaling_too_few_points(tmp_path):
    code, _ = _run(tmp_path, "scaling", "--iterations", "1,2")
    assert code == EXIT_NUMERIC


@pytest.mark.parametrize("command", ["flow", "concurrence"])
def test_bytes_identical_across_threads(tmp_path, command):
    args = [command, "--points", "64", "--iterations", "0,1,3"]
    assert main([*args, "--threads", "1", "--out", str(tmp_path / "a.csv")]) == EXIT_OK
    assert main([*args, "--threads", "3", "--out", str(tmp_path / "b.csv")]) == EXIT_OK
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("QRG_THREADS", "2")
    code, text = _run(tmp_path, "flow", "--points", "5", "--iterations", "2")
    assert code == EXIT_OK and "threads" not in text
    monkeypatch.setenv("QRG_THREADS", "many")
    assert main(["flow", "--points", "5"]) == EXIT_CONFIG


def test_stdout_and_module_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "qrg_xy2d", "flow", "--points", "3", "--iterations", "1"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "# qrg-xy2d v0.1"


def test_runconfig_validate():
    cfg = RunConfig("flow", 0.0, 1.0, 3, (1,))
    cfg.validate()
    with pytest.raises(ConfigError):
        RunConfig("flow", 0.0, float("inf"), 3, (1,)).validate()


@pytest.mark.xfail(strict=True, reason="map slope 11 at gamma_c gives theta = ln 11 / ln 5 = 1.49; same cause as acceptance criterion 10")
def test_scaling_theta_window(tmp_path):
    code, text = _run(tmp_path, "scaling", "--iterations", "1,2,3,4")
    assert code == EXIT_OK
    theta = float(next(ln for ln in text.splitlines() if ln.startswith("# theta:")).split(":")[1])
    assert 0.99 <= theta <= 1.29
