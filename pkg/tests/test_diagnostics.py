"""Norm records, lifespan bound evaluators, and the bound checks."""

import math
from dataclasses import replace

import numpy as np
import pytest

from bsq.diagnostics import (
    CSV_COLUMNS,
    DiagnosticsRecord,
    bootstrap_check,
    calderon_zygmund_ratio,
    csv_row,
    lifespan_lower_bound_2d,
    lifespan_lower_bound_swirl,
    log_interpolation_check,
    record,
    transport_bound_check,
)
from bsq.ensembles import field_ensemble
from bsq.fields import Grid
from bsq.presets import initial_state
from bsq.solver import SolverConfig, SolverState, simulate
from bsq.verification import (
    check_bootstrap_inequality,
    check_calderon_zygmund,
    check_lambda_scaling,
    check_lifespan_anchor,
)

from conftest import spectral


def synthetic_record(t, Omega, Theta=0.0, **overrides):
    base = dict(t=t, Omega=Omega, Theta=Theta, grad_u_inf=0.0, omega_inf=0.0,
                grad_theta_inf=0.0, I1=0.0, I2=0.0, I3=0.0, r=2.0, u_inf=0.0,
                omega_b01=Omega, grad_theta_b01=Theta, d1_theta_b01=0.0,
                grad_u_b01=0.0, energy=0.0, buoyancy_work=0.0, theta_l2=0.0,
                theta_min=0.0, theta_max=0.0, theta_tail=0.0, omega_tail=0.0)
    base.update(overrides)
    return DiagnosticsRecord(**base)


class TestRecord:
    def test_zero_state(self, grid64):
        zero = spectral(grid64, np.zeros((64, 64)))
        rec = record(SolverState(0.0, zero, zero))
        for name in ("Omega", "Theta", "grad_u_inf", "omega_inf",
                     "grad_theta_inf", "u_inf", "energy", "theta_l2"):
            assert getattr(rec, name) == 0.0

    def test_pure_shear(self, grid64, nodes64):
        _, x2 = nodes64
        zero = spectral(grid64, np.zeros((64, 64)))
        state = SolverState(0.0, zero, spectral(grid64, np.cos(x2)))
        rec = record(state, r=2.0)
        assert rec.Theta == 0.0
        # single |k| = 1 mode: B01 part is 1, L2 part is 1/sqrt(2)
        assert rec.Omega == pytest.approx(1.0 + 1.0 / math.sqrt(2.0), rel=1e-12)

    def test_stratified(self, grid64, nodes64):
        _, x2 = nodes64
        zero = spectral(grid64, np.zeros((64, 64)))
        state = SolverState(0.0, spectral(grid64, np.sin(x2)), zero)
        rec = record(state)
        assert rec.Omega == 0.0
        assert rec.grad_theta_inf == pytest.approx(1.0, abs=1e-3)

    def test_rejects_bad_r(self, grid64):
        zero = spectral(grid64, np.zeros((64, 64)))
        with pytest.raises(ValueError):
            record(SolverState(0.0, zero, zero), r=1.0)

    def test_csv_row_matches_columns(self, grid64):
        state = initial_state("vortex_pair", grid64)
        rec = record(state)
        row = csv_row(rec)
        assert len(row) == len(CSV_COLUMNS)
        assert float(row[0]) == rec.t
        assert float(row[1]) == rec.Omega


class TestLifespanBound2d:
    def test_anchor_value(self):
        assert check_lifespan_anchor()["passed"]

    def test_anchor_against_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 50
        expected = mp.log(1 + mp.log(1 + mp.mpf(1)) / 2)
        got = lifespan_lower_bound_2d(1.0, 1.0, 1.0).bound
        assert abs(got - float(expected)) <= 1e-12

    def test_monotone_decreasing_in_theta0(self):
        bounds = [lifespan_lower_bound_2d(1.0, theta0, 1.0).bound
                  for theta0 in np.logspace(-3, 6, 40)]
        assert all(b > a for a, b in zip(bounds[1:], bounds))
        assert bounds[-1] < 1e-5  # tends to zero

    def test_lambda_scaling_identity(self):
        check = check_lambda_scaling(count=100, seed=77)
        assert check["passed"]
        assert check["max_error"] <= 1e-12

    def test_bootstrap_variables(self):
        out = lifespan_lower_bound_2d(2.0, 3.0, 0.7)
        assert out.X == pytest.approx(2 * 0.7 * out.bound * 2.0, rel=1e-15)
        assert out.Y == pytest.approx(2 * 0.7 * 4.0 / 3.0, rel=1e-15)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            lifespan_lower_bound_2d(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            lifespan_lower_bound_2d(1.0, -1.0, 1.0)

    def test_decreasing_in_c_when_log_argument_large(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            omega0 = float(np.exp(rng.uniform(-1, 2)))
            c = float(np.exp(rng.uniform(-1, 2)))
            # keep C*W^2/G comfortably above e so doubling C must shrink
            theta0 = c * omega0 ** 2 / math.exp(rng.uniform(1.0, 4.0))
            lo = lifespan_lower_bound_2d(omega0, theta0, 2 * c).bound
            hi = lifespan_lower_bound_2d(omega0, theta0, c).bound
            assert lo < hi


class TestLifespanBoundSwirl:
    def test_anchor(self):
        out = lifespan_lower_bound_swirl(1.0, 1.0, 1.0)
        assert out.bound == pytest.approx(math.log1p(0.5 * math.log(2.0)),
                                          abs=1e-15)

    def test_diverges_as_swirl_vanishes(self):
        bounds = [lifespan_lower_bound_swirl(1.0, b, 1.0).bound
                  for b in np.logspace(0, -12, 30)]
        assert all(b > a for a, b in zip(bounds, bounds[1:]))
        assert bounds[-1] > 1.0

    def test_against_mpmath_random_points(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 50
        rng = np.random.default_rng(9)
        for _ in range(20):
            a, b, c = (float(np.exp(rng.uniform(-3, 3))) for _ in range(3))
            got = lifespan_lower_bound_swirl(a, b, c).bound
            expected = mp.log(1 + mp.log(1 + mp.mpf(c) * a / b) / 2) / (mp.mpf(c) * a)
            assert abs(got - float(expected)) <= 1e-12 * max(1.0, float(expected))


class TestBootstrapCheck:
    def test_theta_zero_window_is_everything(self, grid64, nodes64):
        _, x2 = nodes64
        zero = spectral(grid64, np.zeros((64, 64)))
        state = SolverState(0.0, zero, spectral(grid64, np.cos(x2)))
        cfg = SolverConfig(grid=grid64, stop_time=0.5, dt_max=0.05)
        traj = simulate(state, cfg)
        report = bootstrap_check(traj, C=1.0)
        assert report["T_b"] == pytest.approx(traj.final_state.t)
        assert report["holds"] and report["margin"] > 0.0

    def test_envelope_violation_reports_first_time(self):
        # synthetic growth Omega(t) = 1 + 5 t^2 against a flat envelope
        times = np.linspace(0.0, 1.0, 101)
        records = [synthetic_record(float(t), float(1 + 5 * t * t),
                                    Theta=1e-9 if t == 0 else 0.0)
                   for t in times]
        report = bootstrap_check(records, C=1e-9)
        assert not report["holds"]
        assert report["margin"] < 0.0
        # envelope ~ 2: violated once 1 + 5 t^2 > 2, i.e. t > 0.447
        assert report["first_violation_t"] == pytest.approx(0.45, abs=0.01)

    def test_small_theta_run_with_calibrated_constant(self, grid64):
        state = initial_state("vortex_pair", grid64, eps_theta=0.1)
        cfg = SolverConfig(grid=grid64, stop_time=1.0, dt_max=0.02)
        traj = simulate(state, cfg)
        c = transport_bound_check(traj, 0.0)["C_min"]
        report = bootstrap_check(traj, c)
        assert report["holds"] and report["margin"] > 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bootstrap_check([], 1.0)


class TestTransportBoundCheck:
    def test_steady_shear_needs_no_constant(self, grid64, nodes64):
        _, x2 = nodes64
        zero = spectral(grid64, np.zeros((64, 64)))
        state = SolverState(0.0, zero, spectral(grid64, np.cos(x2)))
        cfg = SolverConfig(grid=grid64, stop_time=0.5, dt_max=0.05)
        report = transport_bound_check(simulate(state, cfg), 0.0)
        assert report["holds"]
        assert report["C_min"] == 0.0
        assert report["besov0"]["C_min"] == 0.0

    def test_gradient_bound_equality_without_flow(self, grid64, nodes64):
        _, x2 = nodes64
        zero = spectral(grid64, np.zeros((64, 64)))
        state = SolverState(0.0, spectral(grid64, np.sin(x2)), zero)
        cfg = SolverConfig(grid=grid64, stop_time=0.3, dt_max=0.05)
        report = transport_bound_check(simulate(state, cfg), 0.0)
        assert report["besov1"]["holds"]
        assert report["besov1"]["C_min"] == 0.0

    def test_minimal_constant_stable_under_refinement(self):
        constants = {}
        for n in (64, 128):
            grid = Grid(n)
            state = initial_state("vortex_pair", grid, eps_theta=0.2)
            cfg = SolverConfig(grid=grid, stop_time=0.5, dt_max=0.02)
            constants[n] = transport_bound_check(simulate(state, cfg), 0.0)["C_min"]
        assert constants[128] == pytest.approx(constants[64], rel=0.2)

    def test_supplied_constant_margins(self, grid64):
        state = initial_state("vortex_pair", grid64, eps_theta=0.3)
        cfg = SolverConfig(grid=grid64, stop_time=0.5, dt_max=0.02)
        traj = simulate(state, cfg)
        c_min = transport_bound_check(traj, 0.0)["C_min"]
        generous = transport_bound_check(traj, 2.0 * c_min + 1.0)
        assert generous["holds"]
        assert generous["besov0"]["margin"] >= 0.0


class TestLogInterpolation:
    def test_zero_field_skipped(self, grid64):
        zero = spectral(grid64, np.zeros((64, 64)))
        report = log_interpolation_check([zero])
        assert report["skipped"] == 1 and report["count"] == 0

    def test_single_mode_baseline(self, grid64, nodes64):
        x1, _ = nodes64
        report = log_interpolation_check([spectral(grid64, np.cos(8 * x1))])
        assert report["max_ratio"] == pytest.approx(0.27097655614722943,
                                                    rel=1e-10)

    def test_ensemble_bounded(self):
        report = log_interpolation_check(field_ensemble(64, 30, seed=60))
        assert 0.0 < report["max_ratio"] < 1.0


class TestCalderonZygmund:
    def test_l2_identity(self):
        for omega in field_ensemble(64, 5, seed=61):
            assert calderon_zygmund_ratio(omega, 2.0) == pytest.approx(1.0,
                                                                       rel=1e-12)

    def test_suite_check(self):
        assert check_calderon_zygmund(64, 10, seed=62)["passed"]


def test_bootstrap_inequality_grid():
    assert check_bootstrap_inequality()["passed"]
