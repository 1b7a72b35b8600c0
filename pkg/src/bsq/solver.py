"""Pseudo-spectral time integration of the 2D inviscid Boussinesq system.

Vorticity-stream formulation: the state is (t, theta, omega) with

    d theta / dt = -u . grad(theta)
    d omega / dt = -u . grad(omega) + d1 theta

and u reconstructed from omega by Biot-Savart at every evaluation, so
div u = 0 holds exactly. Time stepping is classical 4-stage
Runge-Kutta with a CFL-adaptive step; an optional high-order
exponential spectral filter (off by default) is available for long
runs and is always disclosed in outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import kernels
from .fields import (
    Grid,
    RealField,
    SpectralField,
    _dealias_mult,
    _deriv_k,
    _inv_lap_mult,
    _k_sq,
    _phys,
    _spec,
    invert_laplacian,
    is_dealiased,
    spectral_derivative,
    to_physical,
    transport_term,
)
from .diagnostics import record

FILTER_ORDER = 36
FILTER_STRENGTH = 36.0

TRIGGER_STOP_TIME = "stop_time"
TRIGGER_TAIL = "tail_fraction"
TRIGGER_OMEGA_GROWTH = "omega_growth"
TRIGGER_NAN = "nan"


class CFLError(ValueError):
    """Requested time step violates the advective CFL bound."""

    def __init__(self, dt, admissible_dt):
        super().__init__(
            f"dt={dt} violates the CFL bound; admissible dt <= {admissible_dt}")
        self.admissible_dt = admissible_dt


@dataclass(frozen=True)
class SolverState:
    """Solution snapshot (t, theta, omega) in spectral form.

    Both fields must be dealiased and omega must have zero mean (the
    torus gauge; mean vorticity is conserved, so it is pinned to 0).
    """

    t: float
    theta: SpectralField
    omega: SpectralField

    def __post_init__(self):
        if self.theta.grid != self.omega.grid:
            raise ValueError("theta and omega live on different grids")
        if not is_dealiased(self.theta) or not is_dealiased(self.omega):
            raise ValueError("state fields must be dealiased")
        m = abs(complex(self.omega.coeffs[0, 0]))
        if m > 1e-10:
            raise ValueError(f"omega must have zero mean, got {m:.3e}")

    @property
    def grid(self) -> Grid:
        return self.theta.grid


@dataclass(frozen=True)
class SolverConfig:
    """Time-integration settings and blow-up proxy thresholds.

    The blow-up proxies (spectral tail fraction and Omega growth
    factor) are an operational definition of "numerical lifespan",
    not part of the continuous problem; the trajectory records which
    one fired.
    """

    grid: Grid
    stop_time: float
    cfl: float = 0.4
    dt_max: float = 0.05
    spectral_filter: str = "none"
    tail_fraction: float = 1e-3
    omega_growth: float = 100.0

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt_max <= 0.0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        if self.stop_time <= 0.0:
            raise ValueError(f"stop_time must be positive, got {self.stop_time}")
        if not (0.0 < self.tail_fraction < 1.0):
            raise ValueError(
                f"tail_fraction must lie in (0, 1), got {self.tail_fraction}")
        if not self.omega_growth > 1.0:
            raise ValueError(
                f"omega_growth must exceed 1, got {self.omega_growth}")
        if self.spectral_filter not in ("none", "exponential"):
            raise ValueError(
                f"spectral_filter must be 'none' or 'exponential', "
                f"got {self.spectral_filter!r}")


@dataclass(frozen=True)
class Trajectory:
    """Per-step diagnostics, strided state snapshots, and the stop reason."""

    records: tuple
    snapshots: tuple
    trigger: str
    trigger_time: float
    final_state: SolverState

    def __post_init__(self):
        times = [r.t for r in self.records]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("record times must be strictly increasing")


@lru_cache(maxsize=None)
def _filter_mult(n):
    k_c = n // 3
    rho = np.sqrt(_k_sq(n)) / k_c
    mult = np.ascontiguousarray(np.exp(-FILTER_STRENGTH * rho ** FILTER_ORDER))
    mult.flags.writeable = False
    return mult


def _rhs_arrays(theta_c, omega_c, grid):
    """Raw-array right-hand side; returns (dtheta, domega, u1p, u2p)."""
    n = grid.n
    psi = kernels.mul_mask(omega_c, _inv_lap_mult(n))
    u1 = kernels.mul_ik(psi, _deriv_k(n, 2))
    np.negative(u1, out=u1)
    u2 = kernels.mul_ik(psi, _deriv_k(n, 1))
    u1p = _phys(u1)
    u2p = _phys(u2)

    k1d = _deriv_k(n, 1)
    k2d = _deriv_k(n, 2)
    mask = _dealias_mult(n)

    th1 = _phys(kernels.mul_ik(theta_c, k1d))
    th2 = _phys(kernels.mul_ik(theta_c, k2d))
    dtheta = np.ascontiguousarray(_spec(kernels.advect_combine(u1p, u2p, th1, th2)))
    dtheta = kernels.mul_mask(dtheta, mask)
    np.negative(dtheta, out=dtheta)
    dtheta[0, 0] = 0.0

    om1 = _phys(kernels.mul_ik(omega_c, k1d))
    om2 = _phys(kernels.mul_ik(omega_c, k2d))
    domega = np.ascontiguousarray(_spec(kernels.advect_combine(u1p, u2p, om1, om2)))
    domega = kernels.mul_mask(domega, mask)
    np.negative(domega, out=domega)
    domega[0, 0] = 0.0
    domega += kernels.mul_ik(theta_c, k1d)
    return dtheta, domega, u1p, u2p


def rhs(state: SolverState):
    """Time derivatives (d theta/dt, d omega/dt) at the given state."""
    dtheta, domega, _, _ = _rhs_arrays(state.theta.coeffs, state.omega.coeffs,
                                       state.grid)
    return (SpectralField._wrap(state.grid, dtheta),
            SpectralField._wrap(state.grid, domega))


def velocity_max(state: SolverState) -> float:
    """Pointwise maximum speed, used for the CFL bound."""
    psi = kernels.mul_mask(state.omega.coeffs, _inv_lap_mult(state.grid.n))
    u1 = _phys(-kernels.mul_ik(psi, _deriv_k(state.grid.n, 2)))
    u2 = _phys(kernels.mul_ik(psi, _deriv_k(state.grid.n, 1)))
    return float(np.sqrt(u1 * u1 + u2 * u2).max())


def _rk4_arrays(theta_c, omega_c, grid, dt, filter_mult=None):
    kt1, kw1, u1p, u2p = _rhs_arrays(theta_c, omega_c, grid)
    kt2, kw2, _, _ = _rhs_arrays(kernels.axpy(theta_c, 0.5 * dt, kt1),
                                 kernels.axpy(omega_c, 0.5 * dt, kw1), grid)
    kt3, kw3, _, _ = _rhs_arrays(kernels.axpy(theta_c, 0.5 * dt, kt2),
                                 kernels.axpy(omega_c, 0.5 * dt, kw2), grid)
    kt4, kw4, _, _ = _rhs_arrays(kernels.axpy(theta_c, dt, kt3),
                                 kernels.axpy(omega_c, dt, kw3), grid)
    theta_new = kernels.rk4_combine(theta_c, kt1, kt2, kt3, kt4, dt)
    omega_new = kernels.rk4_combine(omega_c, kw1, kw2, kw3, kw4, dt)
    if filter_mult is not None:
        theta_new = kernels.mul_mask(theta_new, filter_mult)
        omega_new = kernels.mul_mask(omega_new, filter_mult)
    return theta_new, omega_new, u1p, u2p


def time_step(state: SolverState, dt: float, *, cfl: float = 0.4,
              spectral_filter: str = "none", force: bool = False) -> SolverState:
    """One classical Runge-Kutta step of size dt.

    Unless ``force`` is set, dt must respect the advective CFL bound
    cfl * dx / max|u|; violations raise CFLError carrying the
    admissible step.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not force:
        u_max = velocity_max(state)
        if u_max > 0.0:
            admissible = cfl * state.grid.dx / u_max
            if dt > admissible * (1.0 + 1e-12):
                raise CFLError(dt, admissible)
    fm = _filter_mult(state.grid.n) if spectral_filter == "exponential" else None
    theta_new, omega_new, _, _ = _rk4_arrays(
        state.theta.coeffs, state.omega.coeffs, state.grid, dt, fm)
    return SolverState(
        state.t + dt,
        SpectralField._wrap(state.grid, theta_new),
        SpectralField._wrap(state.grid, omega_new),
    )


def apply_scaling(state: SolverState, eps: float) -> SolverState:
    """Map a solution state through the amplitude/time scaling symmetry.

    (t, theta, omega) -> (t/eps, eps^2 theta, eps omega); scaled data
    evolve into scaled states, which the symmetry tests exploit.
    """
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    return SolverState(state.t / eps, state.theta * eps ** 2, state.omega * eps)


def recover_pressure(state: SolverState) -> RealField:
    """Diagnostic pressure from the momentum equation's divergence.

    Solves lap(P) = d2(theta) - div(u . grad u) with the zero-mean
    gauge; the divergence of the reconstructed momentum balance then
    vanishes identically.
    """
    u1, u2 = _velocity(state)
    q1 = transport_term(u1, u2, u1)
    q2 = transport_term(u1, u2, u2)
    rhs_field = (spectral_derivative(state.theta, 2)
                 - spectral_derivative(q1, 1) - spectral_derivative(q2, 2))
    return to_physical(invert_laplacian(rhs_field))


def _velocity(state: SolverState):
    psi = invert_laplacian(state.omega)
    return -spectral_derivative(psi, 2), spectral_derivative(psi, 1)


def simulate(initial: SolverState, config: SolverConfig, *, r: float = 2.0,
             snapshot_stride: int = 0, on_record=None) -> Trajectory:
    """Advance until stop_time or a blow-up proxy fires.

    Records a DiagnosticsRecord at every step (trapezoidal running
    integrals for the continuation criteria) and snapshots the state
    every ``snapshot_stride`` steps when the stride is positive. NaNs
    abort the run, keeping the last valid state.
    """
    if initial.grid != config.grid:
        raise ValueError("initial state grid does not match config grid")
    fm = (_filter_mult(config.grid.n)
          if config.spectral_filter == "exponential" else None)

    state = initial
    rec = record(state, r=r)
    records = [rec]
    if on_record is not None:
        on_record(rec)
    snapshots = [(0, state)] if snapshot_stride > 0 else []
    omega0_norm = rec.Omega
    trigger = None
    step = 0

    while state.t < config.stop_time - 1e-14:
        u_max = max(records[-1].u_inf, 1e-14)
        if not np.isfinite(u_max):
            # diagnostics overflowed even though the fields are finite
            trigger = TRIGGER_NAN
            break
        dt = min(config.dt_max, config.cfl * config.grid.dx / u_max,
                 config.stop_time - state.t)
        if dt <= 0.0 or state.t + dt == state.t:
            trigger = TRIGGER_NAN
            break
        theta_new, omega_new, _, _ = _rk4_arrays(
            state.theta.coeffs, state.omega.coeffs, config.grid, dt, fm)
        if not (np.all(np.isfinite(theta_new)) and np.all(np.isfinite(omega_new))):
            trigger = TRIGGER_NAN
            break
        step += 1
        state = SolverState(
            state.t + dt,
            SpectralField._wrap(config.grid, theta_new),
            SpectralField._wrap(config.grid, omega_new),
        )
        prev = records[-1]
        rec = record(state, r=r)
        half = 0.5 * dt
        rec = replace(
            rec,
            I1=prev.I1 + half * (prev.grad_u_inf + rec.grad_u_inf),
            I2=prev.I2 + half * (prev.omega_inf + prev.grad_theta_inf
                                 + rec.omega_inf + rec.grad_theta_inf),
            I3=prev.I3 + half * (prev.grad_theta_inf + rec.grad_theta_inf),
        )
        records.append(rec)
        if on_record is not None:
            on_record(rec)
        if snapshot_stride > 0 and step % snapshot_stride == 0:
            snapshots.append((step, state))

        if rec.theta_tail > config.tail_fraction or rec.omega_tail > config.tail_fraction:
            trigger = TRIGGER_TAIL
            break
        if omega0_norm > 0.0 and rec.Omega >= config.omega_growth * omega0_norm:
            trigger = TRIGGER_OMEGA_GROWTH
            break

    if trigger is None:
        trigger = TRIGGER_STOP_TIME
    return Trajectory(tuple(records), tuple(snapshots), trigger, state.t, state)
