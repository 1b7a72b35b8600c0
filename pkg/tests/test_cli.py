"""Config parsing, CLI subcommands, artifacts, and determinism."""

import json
import math

import numpy as np
import pytest

from bsq.cli import main
from bsq.config import ConfigError, parse_run_config
from bsq.diagnostics import lifespan_lower_bound_2d
from bsq.experiments import calibrate, run_simulation, run_sweep
from bsq.fields import read_bsqf


def write_cfg(path, body):
    path.write_text(body)
    return str(path)


BASE = """
[run]
preset = {preset}
seed = {seed}
eps_theta = {eps_theta}
eps_u = 1.0
out_dir = {out_dir}
snapshot_stride = {stride}

[solver]
n = {n}
stop_time = {stop}
dt_max = 0.02
"""


def cfg_text(out_dir, preset="shear", seed=42, eps_theta=1.0, n=64, stop=0.2,
             stride=0):
    return BASE.format(preset=preset, seed=seed, eps_theta=eps_theta,
                       out_dir=out_dir, n=n, stop=stop, stride=stride)


class TestConfigParsing:
    def test_round_trip(self, tmp_path):
        path = write_cfg(tmp_path / "run.cfg", cfg_text(tmp_path / "out"))
        cfg = parse_run_config(path)
        assert cfg.preset == "shear"
        assert cfg.solver.grid.n == 64
        assert cfg.solver.stop_time == 0.2
        assert cfg.r == 2.0  # default

    def test_unknown_key_fails_closed_with_line(self, tmp_path):
        body = cfg_text(tmp_path / "out") + "viscosity = 0.1\n"
        path = write_cfg(tmp_path / "run.cfg", body)
        with pytest.raises(ConfigError, match="viscosity"):
            parse_run_config(path)
        with pytest.raises(ConfigError, match="line"):
            parse_run_config(path)

    def test_unknown_section_rejected(self, tmp_path):
        body = cfg_text(tmp_path / "out") + "\n[plotting]\nstyle = dark\n"
        path = write_cfg(tmp_path / "run.cfg", body)
        with pytest.raises(ConfigError, match="plotting"):
            parse_run_config(path)

    def test_tiny_grid_rejected(self, tmp_path):
        path = write_cfg(tmp_path / "run.cfg", cfg_text(tmp_path / "out", n=4))
        with pytest.raises(ConfigError, match="at least 8"):
            parse_run_config(path)

    def test_unknown_preset_rejected(self, tmp_path):
        path = write_cfg(tmp_path / "run.cfg",
                         cfg_text(tmp_path / "out", preset="tornado"))
        with pytest.raises(ConfigError, match="tornado"):
            parse_run_config(path)


class TestSimulateCommand:
    def test_shear_run_writes_artifacts(self, tmp_path, capsys):
        out = tmp_path / "out"
        path = write_cfg(tmp_path / "run.cfg", cfg_text(out, stride=5))
        assert main(["simulate", "-c", path]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["trigger"] == "stop_time"
        assert summary["theta_l2_drift"] <= 1e-10
        assert summary["spectral_filter"] == "none"
        diag = (out / "diag.csv").read_text().splitlines()
        assert diag[0] == "t,Omega,Theta,grad_u_inf,omega_inf,grad_theta_inf,I1,I2,I3"
        assert len(diag) >= 10
        snap = read_bsqf(out / "omega_00000000.bsqf")
        assert snap.grid.n == 64

    def test_deterministic_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        p1 = write_cfg(tmp_path / "r1.cfg",
                       cfg_text(out1, preset="random_seeded", seed=42))
        p2 = write_cfg(tmp_path / "r2.cfg",
                       cfg_text(out2, preset="random_seeded", seed=42))
        assert main(["simulate", "-c", p1]) == 0
        assert main(["simulate", "-c", p2]) == 0
        assert (out1 / "diag.csv").read_bytes() == (out2 / "diag.csv").read_bytes()

    def test_invalid_config_nonzero_exit(self, tmp_path, capsys):
        path = write_cfg(tmp_path / "bad.cfg", cfg_text(tmp_path / "out", n=4))
        assert main(["simulate", "-c", path]) == 1
        assert "at least 8" in capsys.readouterr().err


class TestVerifyCommand:
    def test_lp_suite_passes(self, capsys):
        assert main(["verify", "--suite", "lp", "--n", "64", "--count", "5"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"]
        names = {c["check"] for c in report["checks"]}
        assert {"partition_of_unity", "bernstein", "lp_reconstruction"} <= names

    def test_bony_suite_report_shape(self, capsys):
        assert main(["verify", "--suite", "bony", "--n", "64", "--count", "4"]) == 0
        report = json.loads(capsys.readouterr().out)
        identity = next(c for c in report["checks"]
                        if c["check"] == "bony_identity")
        for key in ("test", "n", "ensemble_size", "max_ratio", "residuals"):
            assert key in identity
        assert set(identity["residuals"]) == {"q50", "q90", "max"}

    def test_unknown_suite_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--suite", "spectral"])
        assert exc.value.code == 2


class TestCalibrateCommand:
    def test_steady_shear_needs_no_constant(self, tmp_path, capsys):
        out = tmp_path / "cal"
        path = write_cfg(tmp_path / "cal.cfg", cfg_text(out, stop=0.5))
        assert main(["calibrate", "-c", path]) == 0
        payload = json.loads((out / "calibration.json").read_text())
        assert payload["C"] == 0.0
        assert len(payload["trajectory_hash"]) == 64

    def test_reproducible_constant(self, tmp_path):
        cfgs = []
        for name in ("a", "b"):
            out = tmp_path / name
            cfgs.append(parse_run_config(write_cfg(
                tmp_path / f"{name}.cfg",
                cfg_text(out, preset="vortex_pair", eps_theta=0.2, stop=0.5))))
        c1 = calibrate(cfgs[0])["C"]
        c2 = calibrate(cfgs[1])["C"]
        assert c1 > 0.0
        assert c1 == pytest.approx(c2, abs=1e-12)

    def test_too_short_trajectory_rejected(self, tmp_path):
        out = tmp_path / "short"
        path = write_cfg(tmp_path / "short.cfg", cfg_text(out, stop=0.05))
        cfg = parse_run_config(path)
        with pytest.raises(ValueError, match="too short"):
            calibrate(cfg)


class TestSweepCommand:
    def test_small_sweep(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        path = write_cfg(tmp_path / "sweep.cfg",
                         cfg_text(out, preset="vortex_pair", eps_theta=0.5,
                                  stop=0.4))
        assert main(["sweep", "-c", path, "--eps", "1,0.5"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [row["eps"] for row in payload["rows"]] == [1.0, 0.5]
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0] == "eps,T_num,trigger,Omega0,Theta0,T_bound"
        assert len(lines) == 3
        assert (out / "eps_1" / "diag.csv").exists()
        assert (out / "calibration.json").exists()

    def test_bound_column_consistency(self, tmp_path):
        # every row's bound reproduces the closed form at its own norms
        out = tmp_path / "sweep2"
        cfg = parse_run_config(write_cfg(
            tmp_path / "s.cfg", cfg_text(out, preset="vortex_pair",
                                         eps_theta=0.5, stop=0.4)))
        result = run_sweep(cfg, [1.0, 0.5], out_dir=out)
        for row in result.rows:
            if result.C > 0.0 and row.Theta0 > 0.0:
                expected = lifespan_lower_bound_2d(row.Omega0, row.Theta0,
                                                   result.C).bound
                assert row.T_bound == pytest.approx(expected, rel=1e-12)
            else:
                assert math.isinf(row.T_bound)

    def test_zero_theta_rows_run_pure_euler(self, tmp_path):
        # theta amplitude 0: every row is a steady Euler shear, no trigger
        out = tmp_path / "euler"
        cfg = parse_run_config(write_cfg(
            tmp_path / "e.cfg", cfg_text(out, preset="shear", eps_theta=0.0,
                                         stop=0.3)))
        result = run_sweep(cfg, [1.0, 0.5], write=False)
        for row in result.rows:
            assert row.trigger == "stop_time"
            assert row.T_num == pytest.approx(0.3)
            assert math.isinf(row.T_bound)

    def test_rejects_bad_eps_lists(self, tmp_path):
        cfg = parse_run_config(write_cfg(
            tmp_path / "x.cfg", cfg_text(tmp_path / "xo")))
        with pytest.raises(ValueError):
            run_sweep(cfg, [0.5, 1.0], write=False)
        with pytest.raises(ValueError):
            run_sweep(cfg, [1.0, -0.5], write=False)

    def test_nan_rows_recorded_and_sweep_continues(self, tmp_path):
        # gigantic theta amplitude overflows row eps=1; the sweep still
        # finishes and records the smaller row normally
        out = tmp_path / "nan"
        cfg = parse_run_config(write_cfg(
            tmp_path / "n.cfg",
            cfg_text(out, preset="vortex_pair", eps_theta=1e200, stop=0.3)))
        with np.errstate(all="ignore"):
            result = run_sweep(cfg, [1.0, 1e-199], write=False)
        assert result.rows[0].trigger == "nan"
        assert result.rows[1].trigger in ("stop_time", "tail_fraction",
                                          "omega_growth")


def test_entry_point_runs_module():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
