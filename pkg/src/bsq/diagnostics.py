"""Norm tracking, continuation integrals, and lifespan bound evaluators.

A DiagnosticsRecord captures the dyadic/Lebesgue norms the continuation
theory watches: Omega(t) and Theta(t) (vorticity and temperature
gradient in the intersection norm B^0_{inf,1} + L^r, sum convention),
the sup norms whose time integrals give the three continuation
criteria, and bookkeeping quantities (energy, buoyancy work, tail
fractions) used by the solver's stopping logic and conservation tests.

Vector fields use a fixed convention: Lebesgue norms act on the
pointwise Euclidean magnitude, Besov norms take the max over
components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import (
    PreconditionError,
    SpectralField,
    _deriv_k,
    _inv_lap_mult,
    _lp_norm,
    _phys,
    tail_fraction,
)
from .littlewood_paley import _as_index, besov_norm, default_cutoff

CSV_COLUMNS = ("t", "Omega", "Theta", "grad_u_inf", "omega_inf",
               "grad_theta_inf", "I1", "I2", "I3")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Time-stamped norms and running continuation integrals.

    I1, I2, I3 accumulate the integrands |grad u|_inf,
    |omega|_inf + |grad theta|_inf, and |grad theta|_inf (trapezoidal
    rule along the step grid); the fields beyond the CSV columns are
    auxiliary state for the bound checks and conservation tests.
    """

    t: float
    Omega: float
    Theta: float
    grad_u_inf: float
    omega_inf: float
    grad_theta_inf: float
    I1: float
    I2: float
    I3: float
    r: float
    # auxiliary quantities (not part of diag.csv)
    u_inf: float
    omega_b01: float
    grad_theta_b01: float
    d1_theta_b01: float
    grad_u_b01: float
    energy: float
    buoyancy_work: float
    theta_l2: float
    theta_min: float
    theta_max: float
    theta_tail: float
    omega_tail: float


def csv_row(rec: DiagnosticsRecord):
    return [repr(float(getattr(rec, name))) for name in CSV_COLUMNS]


def _block_sup_sums(coeff_list, masks):
    """Sum over j of sup-norms of each field's dyadic blocks.

    One batched inverse transform covers every (field, block) pair.
    """
    stacks = [kernels.mul_mask_stack(c, masks) for c in coeff_list]
    phys = _phys(np.concatenate(stacks, axis=0))
    sups = np.abs(phys).max(axis=(1, 2))
    rows = masks.shape[0]
    return [float(sups[i * rows:(i + 1) * rows].sum()) for i in range(len(coeff_list))]


def record(state, r: float = 2.0, profile=None) -> DiagnosticsRecord:
    """Evaluate every tracked norm of a solver state (integrals start at 0)."""
    r = float(r)
    if not (1.0 < r < math.inf):
        raise ValueError(f"r must lie in (1, inf), got {r}")
    profile = profile or default_cutoff()
    grid = state.grid
    n = grid.n
    theta_c = state.theta.coeffs
    omega_c = state.omega.coeffs
    k1d = _deriv_k(n, 1)
    k2d = _deriv_k(n, 2)

    psi = kernels.mul_mask(omega_c, _inv_lap_mult(n))
    u1_c = kernels.mul_ik(psi, k2d)
    np.negative(u1_c, out=u1_c)
    u2_c = kernels.mul_ik(psi, k1d)
    g1_c = kernels.mul_ik(theta_c, k1d)
    g2_c = kernels.mul_ik(theta_c, k2d)
    # div u = 0 gives d2 u2 = -d1 u1: three gradient components suffice.
    gu_c = [kernels.mul_ik(u1_c, k1d), kernels.mul_ik(u1_c, k2d),
            kernels.mul_ik(u2_c, k1d)]

    singles = _phys(np.stack([theta_c, omega_c, u1_c, u2_c, g1_c, g2_c] + gu_c))
    theta_p, omega_p, u1_p, u2_p, g1_p, g2_p = singles[:6]
    gu_p = singles[6:]

    omega_inf = float(np.abs(omega_p).max())
    omega_lr = _lp_norm(omega_p, r)
    grad_theta_mag = np.sqrt(g1_p * g1_p + g2_p * g2_p)
    grad_theta_inf = float(grad_theta_mag.max())
    grad_theta_lr = _lp_norm(grad_theta_mag, r)
    grad_u_inf = float(np.sqrt(
        2.0 * gu_p[0] ** 2 + gu_p[1] ** 2 + gu_p[2] ** 2).max())
    u_inf = float(np.sqrt(u1_p * u1_p + u2_p * u2_p).max())

    masks = profile.block_masks(grid)
    b01 = _block_sup_sums([omega_c, g1_c, g2_c] + gu_c, masks)
    omega_b01 = b01[0]
    d1_theta_b01 = b01[1]
    grad_theta_b01 = max(b01[1], b01[2])
    grad_u_b01 = max(b01[3:])

    return DiagnosticsRecord(
        t=float(state.t),
        Omega=omega_b01 + omega_lr,
        Theta=grad_theta_b01 + grad_theta_lr,
        grad_u_inf=grad_u_inf,
        omega_inf=omega_inf,
        grad_theta_inf=grad_theta_inf,
        I1=0.0, I2=0.0, I3=0.0,
        r=r,
        u_inf=u_inf,
        omega_b01=omega_b01,
        grad_theta_b01=grad_theta_b01,
        d1_theta_b01=d1_theta_b01,
        grad_u_b01=grad_u_b01,
        energy=0.5 * float(np.mean(u1_p * u1_p + u2_p * u2_p)),
        buoyancy_work=float(np.mean(theta_p * u2_p)),
        theta_l2=_lp_norm(theta_p, 2.0),
        theta_min=float(theta_p.min()),
        theta_max=float(theta_p.max()),
        theta_tail=tail_fraction(state.theta),
        omega_tail=tail_fraction(state.omega),
    )


@dataclass(frozen=True)
class LifespanBound:
    """Closed-form lifespan lower bound and its bootstrap variables."""

    C: float
    Omega0: float
    Theta0: float
    bound: float
    X: float
    Y: float


def lifespan_lower_bound_2d(omega0: float, theta0: float, C: float) -> LifespanBound:
    """Lower bound T* >= log(1 + 0.5*log(1 + C*W^2/G)) / (C*W).

    W is the initial vorticity norm Omega_0 and G the initial
    temperature-gradient norm Theta_0, both in the intersection norm;
    C is an empirical calibration constant, never assumed from theory.
    """
    if omega0 <= 0.0 or theta0 <= 0.0 or C <= 0.0:
        raise ValueError("omega0, theta0 and C must all be positive")
    inner = math.log1p(C * omega0 * omega0 / theta0)
    bound = math.log1p(0.5 * inner) / (C * omega0)
    return LifespanBound(C=C, Omega0=omega0, Theta0=theta0, bound=bound,
                         X=2.0 * C * bound * omega0,
                         Y=2.0 * C * omega0 * omega0 / theta0)


def lifespan_lower_bound_swirl(omega_theta_norm: float, u_theta_sq_norm: float,
                               C: float) -> LifespanBound:
    """Axisymmetric-with-swirl analogue of the 2D bound.

    Pure scalar evaluator: T* >= log(1 + 0.5*log(1 + C*a/b)) / (C*a),
    with a the angular-vorticity norm and b the norm of the squared
    swirl. The two norms are stored in the Omega0/Theta0 slots.
    """
    if omega_theta_norm <= 0.0 or u_theta_sq_norm <= 0.0 or C <= 0.0:
        raise ValueError("both norms and C must be positive")
    a, b = omega_theta_norm, u_theta_sq_norm
    inner = math.log1p(C * a / b)
    bound = math.log1p(0.5 * inner) / (C * a)
    return LifespanBound(C=C, Omega0=a, Theta0=b, bound=bound,
                         X=2.0 * C * bound * a, Y=2.0 * C * a / b)


def _records_of(traj):
    return list(getattr(traj, "records", traj))


def _cumtrapz(t, f):
    out = np.zeros_like(t)
    if len(t) > 1:
        out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))
    return out


def bootstrap_check(traj, C: float) -> dict:
    """Check the Gronwall envelope Omega(t) <= 2*Omega_0*e^{2*C*t*Omega_0}.

    First finds the largest recorded T_b with
    T_b * Theta_0 * exp(C * int_0^{T_b} Omega) <= Omega_0 (the
    smallness window), then verifies the envelope on [0, T_b] and
    reports the minimal margin.
    """
    records = _records_of(traj)
    if not records:
        raise ValueError("empty trajectory")
    t = np.array([rec.t for rec in records])
    om = np.array([rec.Omega for rec in records])
    omega0 = om[0]
    theta0 = records[0].Theta
    cum = _cumtrapz(t, om)

    smallness = t * theta0 * np.exp(C * cum) <= omega0 + 1e-300
    idx_b = 0
    while idx_b + 1 < len(t) and smallness[idx_b + 1]:
        idx_b += 1
    T_b = float(t[idx_b])

    window = slice(0, idx_b + 1)
    envelope = 2.0 * omega0 * np.exp(2.0 * C * t[window] * omega0)
    gaps = envelope - om[window]
    margin = float(gaps.min())
    holds = margin > 0.0
    first_violation = None if holds else float(t[window][int(np.argmax(gaps <= 0.0))])
    return {
        "check": "bootstrap_envelope",
        "C": float(C),
        "T_b": T_b,
        "holds": bool(holds),
        "margin": margin,
        "first_violation_t": first_violation,
    }


def _min_holding_constant(predicate, rel_tol=1e-3):
    """Smallest C >= 0 with predicate(C) true, assuming monotonicity."""
    if predicate(0.0):
        return 0.0
    hi = 1e-6
    while not predicate(hi):
        hi *= 2.0
        if hi > 1e18:
            return math.inf
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def transport_bound_check(traj, C: float) -> dict:
    """Evaluate the two transport inequalities along a trajectory.

    Null-regularity bound for the vorticity:
        |omega(t)|_{B01} <= (|omega_0|_{B01} + int |d1 theta|_{B01})
                            * (1 + C int |grad u|_inf),
    exponential bound for the temperature gradient:
        |grad theta(t)|_{B01} <= |grad theta_0|_{B01}
                                 * exp(C int |grad u|_{B01}).

    Reports margins at the supplied C and the minimal C making each
    inequality hold over the whole trajectory (bisection, 1e-3
    relative).
    """
    records = _records_of(traj)
    if not records:
        raise ValueError("empty trajectory")
    t = np.array([rec.t for rec in records])
    omega_b01 = np.array([rec.omega_b01 for rec in records])
    source_int = _cumtrapz(t, np.array([rec.d1_theta_b01 for rec in records]))
    gradu_inf_int = _cumtrapz(t, np.array([rec.grad_u_inf for rec in records]))
    grad_theta_b01 = np.array([rec.grad_theta_b01 for rec in records])
    gradu_b01_int = _cumtrapz(t, np.array([rec.grad_u_b01 for rec in records]))

    amplitude = omega_b01[0] + source_int

    def eval_besov0(c):
        rhs = amplitude * (1.0 + c * gradu_inf_int)
        return rhs - omega_b01

    def eval_besov1(c):
        rhs = grad_theta_b01[0] * np.exp(c * gradu_b01_int)
        return rhs - grad_theta_b01

    def report_for(evaluate):
        gaps = evaluate(C)
        scale = 1.0 + float(np.abs(gaps).max())
        holds = bool(gaps.min() >= -1e-12 * scale)
        first = None if holds else float(t[int(np.argmax(gaps < -1e-12 * scale))])
        tol = 1e-12 * (1.0 + float(np.abs(omega_b01).max() + grad_theta_b01.max()))
        c_min = _min_holding_constant(lambda c: bool(evaluate(c).min() >= -tol))
        return {
            "holds": holds,
            "margin": float(gaps.min()),
            "first_violation_t": first,
            "C_min": float(c_min),
        }

    besov0 = report_for(eval_besov0)
    besov1 = report_for(eval_besov1)
    return {
        "check": "transport_bounds",
        "C": float(C),
        "besov0": besov0,
        "besov1": besov1,
        "holds": besov0["holds"] and besov1["holds"],
        "C_min": max(besov0["C_min"], besov1["C_min"]),
    }


def _velocity_gradients(omega: SpectralField):
    """The three independent components (d1 u1, d2 u1, d1 u2); d2 u2 = -d1 u1."""
    n = omega.grid.n
    psi = kernels.mul_mask(omega.coeffs, _inv_lap_mult(n))
    k1d, k2d = _deriv_k(n, 1), _deriv_k(n, 2)
    u1 = kernels.mul_ik(psi, k2d)
    np.negative(u1, out=u1)
    u2 = kernels.mul_ik(psi, k1d)
    return [kernels.mul_ik(u1, k1d), kernels.mul_ik(u1, k2d),
            kernels.mul_ik(u2, k1d)]


def log_interpolation_check(fields, idx=(2.5, 2.0, 2.0), profile=None) -> dict:
    """Empirical ratios for the logarithmic gradient-velocity bound.

    For each vorticity field, compares |grad u|_inf against
    (|omega|_p + |omega|_inf) * log(e + |omega|_{B^{s-1}_{p,q}}).
    Zero fields are skipped (0/0 excluded by convention).
    """
    index = _as_index(idx)
    profile = profile or default_cutoff()
    ratios = []
    skipped = 0
    n = None
    for omega in fields:
        n = omega.grid.n
        omega_p = _phys(omega.coeffs)
        sup = float(np.abs(omega_p).max())
        if sup == 0.0:
            skipped += 1
            continue
        gu = _phys(np.stack(_velocity_gradients(omega)))
        grad_u_inf = float(np.sqrt(2.0 * gu[0] ** 2 + gu[1] ** 2 + gu[2] ** 2).max())
        lp_part = _lp_norm(omega_p, index.p) + sup
        log_part = math.log(math.e + besov_norm(
            omega, (index.s - 1.0, index.p, index.q), profile))
        ratios.append(grad_u_inf / (lp_part * log_part))
    ratios = np.array(ratios)
    return {
        "check": "log_interpolation",
        "n": n,
        "count": int(ratios.size),
        "skipped": skipped,
        "max_ratio": float(ratios.max()) if ratios.size else 0.0,
        "mean_ratio": float(ratios.mean()) if ratios.size else 0.0,
    }


def calderon_zygmund_ratio(omega: SpectralField, p: float) -> float:
    """|grad u|_{L^p} / |omega|_{L^p} for the Biot-Savart velocity."""
    omega_p = _phys(omega.coeffs)
    denom = _lp_norm(omega_p, p)
    if denom == 0.0:
        raise PreconditionError("zero vorticity has no Calderon-Zygmund ratio")
    gu = _phys(np.stack(_velocity_gradients(omega)))
    grad_mag = np.sqrt(2.0 * gu[0] ** 2 + gu[1] ** 2 + gu[2] ** 2)
    return _lp_norm(grad_mag, p) / denom
