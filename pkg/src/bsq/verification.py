"""Property suites behind ``bsq verify``.

Each suite returns a list of check dicts with at least ``check``,
``n`` and ``passed``; ensemble checks follow the report shape
{test, n, ensemble_size, max_ratio, residuals: quantiles}. The same
functions back the pytest acceptance tests, with the sizes dialed up.
"""

from __future__ import annotations

import math

import numpy as np

from . import bony
from .diagnostics import calderon_zygmund_ratio, lifespan_lower_bound_2d
from .ensembles import field_ensemble, paired_field_ensemble, velocity_pair_ensemble
from .fields import (
    Grid,
    RealField,
    dealias,
    gradient,
    l2_norm_spectral,
    to_physical,
    to_spectral,
    velocity_from_vorticity,
)
from .littlewood_paley import (
    besov_norm,
    block_lp_norms,
    decompose,
    default_cutoff,
    dyadic_block,
    j_max,
)
from .presets import initial_state
from .solver import SolverConfig, SolverState, apply_scaling, simulate, time_step


def _quantiles(values):
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return {"q50": 0.0, "q90": 0.0, "max": 0.0}
    return {
        "q50": float(np.quantile(values, 0.5)),
        "q90": float(np.quantile(values, 0.9)),
        "max": float(values.max()),
    }


# ---------------------------------------------------------------- lp suite

def check_partition_of_unity(n: int, tol: float = 1e-12) -> dict:
    masks = default_cutoff().block_masks(Grid(n))
    err = float(np.abs(masks.sum(axis=0) - 1.0).max())
    return {"check": "partition_of_unity", "n": n, "max_error": err,
            "passed": err <= tol}


def check_reconstruction(n: int, count: int, seed: int, tol: float = 1e-12) -> dict:
    residuals = []
    for f in field_ensemble(n, count, seed):
        resid = l2_norm_spectral(decompose(f).reconstruct() - f)
        residuals.append(resid / l2_norm_spectral(f))
    stats = _quantiles(residuals)
    return {"test": "lp_reconstruction", "check": "lp_reconstruction", "n": n,
            "ensemble_size": count, "max_ratio": stats["max"],
            "residuals": stats, "passed": stats["max"] <= tol}


def check_block_orthogonality(n: int, seed: int = 7, tol: float = 0.0) -> dict:
    grid = Grid(n)
    f = field_ensemble(n, 1, seed)[0]
    worst = 0.0
    for j in range(0, j_max(grid) + 1):
        for jp in range(j + 2, j_max(grid) + 1):
            worst = max(worst, l2_norm_spectral(dyadic_block(dyadic_block(f, j), jp)))
    return {"check": "block_orthogonality", "n": n, "max_error": worst,
            "passed": worst <= tol}


def check_bernstein(n: int, count: int, seed: int, bound: float = 4.0) -> dict:
    """sup-over-blocks of |grad block|_p / (2^j |block|_p) stays below 4."""
    grid = Grid(n)
    profile = default_cutoff()
    worst = 0.0
    for f in field_ensemble(n, count, seed):
        g1, g2 = gradient(f)
        for p in (1.0, 2.0, math.inf):
            norms = block_lp_norms(f, p, profile)
            g1n = block_lp_norms(g1, p, profile)
            g2n = block_lp_norms(g2, p, profile)
            for idx in range(1, len(norms)):  # j >= 0
                if norms[idx] > 1e-13:
                    j = idx - 1
                    ratio = max(g1n[idx], g2n[idx]) / (2.0 ** j * norms[idx])
                    worst = max(worst, ratio)
    return {"check": "bernstein", "n": n, "ensemble_size": count,
            "max_ratio": worst, "passed": worst <= bound}


def check_embedding(n: int, count: int, seed: int) -> dict:
    """|f|_inf is at most the (0, inf, 1) Besov norm, blockwise triangle."""
    worst = -math.inf
    for f in field_ensemble(n, count, seed):
        sup = float(np.abs(to_physical(f).samples).max())
        b01 = besov_norm(f, (0.0, math.inf, 1.0))
        worst = max(worst, sup - b01)
    return {"check": "linf_embedding", "n": n, "ensemble_size": count,
            "max_excess": worst, "passed": worst <= 1e-12}


def check_norm_ordering(n: int, count: int, seed: int) -> dict:
    ok = True
    for f in field_ensemble(n, count, seed):
        for s, p in ((0.0, math.inf), (1.5, 2.0)):
            n1 = besov_norm(f, (s, p, 1.0))
            n2 = besov_norm(f, (s, p, 2.0))
            ninf = besov_norm(f, (s, p, math.inf))
            ok = ok and (n1 >= n2 - 1e-12) and (n2 >= ninf - 1e-12)
    return {"check": "lq_monotonicity", "n": n, "ensemble_size": count,
            "passed": ok}


def lp_suite(n: int = 64, count: int = 50, seed: int = 1234) -> list:
    return [
        check_partition_of_unity(n),
        check_reconstruction(n, count, seed),
        check_block_orthogonality(n),
        check_bernstein(n, max(count // 2, 10), seed),
        check_embedding(n, count, seed),
        check_norm_ordering(n, max(count // 5, 5), seed),
    ]


# -------------------------------------------------------------- bony suite

def check_bony_identity(n: int, count: int, seed: int, tol: float = 1e-11) -> dict:
    residuals = []
    fields = field_ensemble(n, 2 * count, seed)
    for f, g in zip(fields[0::2], fields[1::2]):
        t_fg, t_gf, rem = bony.bony_split(f, g)
        direct = bony._pointwise(f, g)
        residuals.append(l2_norm_spectral((t_fg + t_gf + rem) - direct)
                         / l2_norm_spectral(direct))
    stats = _quantiles(residuals)
    return {"test": "bony_identity", "check": "bony_identity", "n": n,
            "ensemble_size": count, "max_ratio": stats["max"],
            "residuals": stats, "passed": stats["max"] <= tol}


def check_remainder_symmetry(n: int, count: int, seed: int,
                             tol: float = 1e-14) -> dict:
    worst = 0.0
    fields = field_ensemble(n, 2 * count, seed)
    for f, g in zip(fields[0::2], fields[1::2]):
        d = l2_norm_spectral(bony.remainder(f, g) - bony.remainder(g, f))
        scale = max(l2_norm_spectral(bony.remainder(f, g)), 1e-300)
        worst = max(worst, d / scale)
    return {"check": "remainder_symmetry", "n": n, "ensemble_size": count,
            "max_ratio": worst, "passed": worst <= tol}


def check_six_term(n: int, count: int, seed: int, js=(1, 2, 3, 4, 5),
                   tol: float = 1e-10) -> dict:
    residuals = []
    for u, omega in velocity_pair_ensemble(n, count, seed):
        for j in js:
            com = bony.commutator(u, j, omega)
            split = bony.six_term_decomposition(u, j, omega)
            scale = max(l2_norm_spectral(com), 1e-300)
            residuals.append(l2_norm_spectral(split.total() - com) / scale)
    stats = _quantiles(residuals)
    return {"test": "six_term_commutator", "check": "six_term_commutator",
            "n": n, "ensemble_size": count, "max_ratio": stats["max"],
            "residuals": stats, "passed": stats["max"] <= tol}


def commutator_ratio_ensemble(n: int, count: int, seed: int,
                              idx=(2.5, 2.0, 2.0)) -> float:
    """Max commutator-estimate ratio over a seeded (u, omega) ensemble."""
    worst = 0.0
    for u, omega in velocity_pair_ensemble(n, count, seed):
        worst = max(worst, bony.commutator_ratio(u, omega, idx))
    return worst


def paired_commutator_ratio_ensemble(n_coarse: int, n_fine: int, count: int,
                                     seed: int, idx=(2.5, 2.0, 2.0)):
    """Max ratios for the same fields realised on two grids."""
    fine = Grid(n_fine)
    worst_coarse = 0.0
    worst_fine = 0.0
    omegas = paired_field_ensemble(n_coarse, n_fine, count, seed)
    vorts = paired_field_ensemble(n_coarse, n_fine, count, seed + 1)
    for (om_c, om_f), (w_c, w_f) in zip(omegas, vorts):
        u_c = velocity_from_vorticity(w_c)
        u_f = velocity_from_vorticity(w_f)
        worst_coarse = max(worst_coarse, bony.commutator_ratio(u_c, om_c, idx))
        worst_fine = max(worst_fine, bony.commutator_ratio(u_f, om_f, idx))
    return worst_coarse, worst_fine


def check_commutator_ratio_stability(n_coarse: int, n_fine: int, count: int,
                                     seed: int, factor: float = 1.5) -> dict:
    worst_c, worst_f = paired_commutator_ratio_ensemble(n_coarse, n_fine, count, seed)
    return {"test": "commutator_ratio_stability",
            "check": "commutator_ratio_stability", "n": n_fine,
            "ensemble_size": count,
            "max_ratio": worst_f, "coarse_max_ratio": worst_c,
            "growth": worst_f / max(worst_c, 1e-300),
            "passed": worst_f <= factor * worst_c}


def bony_suite(n: int = 64, count: int = 20, seed: int = 99) -> list:
    return [
        check_bony_identity(n, count, seed),
        check_remainder_symmetry(n, max(count // 2, 5), seed),
        check_six_term(n, max(count // 4, 3), seed, js=(1, 2, 3)),
        check_commutator_ratio_stability(n, 2 * n, max(count // 2, 5), seed),
    ]


# ------------------------------------------------------------ solver suite

def check_steady_presets(n: int = 64, stop_time: float = 0.25) -> dict:
    worst = 0.0
    grid = Grid(n)
    for preset in ("stratified", "shear"):
        state = initial_state(preset, grid)
        cfg = SolverConfig(grid=grid, stop_time=stop_time, dt_max=0.02)
        traj = simulate(state, cfg)
        drift_t = l2_norm_spectral(traj.final_state.theta - state.theta)
        drift_w = l2_norm_spectral(traj.final_state.omega - state.omega)
        worst = max(worst, drift_t, drift_w)
    return {"check": "steady_presets", "n": n, "max_drift": worst,
            "passed": worst <= 1e-10}


def check_linear_column_solution(n: int = 64, stop_time: float = 1.0) -> dict:
    """Fields depending on x1 only evolve linearly: an exact oracle."""
    grid = Grid(n)
    x1, _ = grid.nodes()
    theta = dealias(to_spectral(RealField(grid, np.cos(x1))))
    omega = dealias(to_spectral(RealField(grid, np.cos(x1))))
    cfg = SolverConfig(grid=grid, stop_time=stop_time, dt_max=0.02)
    traj = simulate(SolverState(0.0, theta, omega), cfg)
    t = traj.final_state.t
    exact = np.cos(x1) - t * np.sin(x1)
    err = float(np.abs(to_physical(traj.final_state.omega).samples - exact).max())
    return {"check": "linear_column_solution", "n": n, "max_error": err,
            "passed": err <= 1e-10}


def check_scaling_group_law(n: int = 64, seed: int = 5) -> dict:
    state = initial_state("random_seeded", Grid(n), seed=seed)
    state = apply_scaling(state, 1.7)
    back = apply_scaling(apply_scaling(state, 0.5), 2.0)
    err = max(float(np.abs(back.theta.coeffs - state.theta.coeffs).max()),
              float(np.abs(back.omega.coeffs - state.omega.coeffs).max()))
    return {"check": "scaling_group_law", "n": n, "max_error": err,
            "passed": err <= 1e-14}


def check_mean_conservation(n: int = 64, steps: int = 50) -> dict:
    grid = Grid(n)
    x1, x2 = grid.nodes()
    theta = dealias(to_spectral(RealField(grid, 0.4 + 0.3 * np.sin(x1) * np.sin(x2))))
    omega = dealias(to_spectral(RealField(grid, np.cos(x2) + 0.2 * np.sin(x1))))
    state = SolverState(0.0, theta, omega)
    mean0 = complex(state.theta.coeffs[0, 0])
    for _ in range(steps):
        state = time_step(state, 0.01, force=True)
    drift = abs(complex(state.theta.coeffs[0, 0]) - mean0)
    drift = max(drift, abs(complex(state.omega.coeffs[0, 0])))
    return {"check": "mean_conservation", "n": n, "max_drift": drift,
            "passed": drift <= 1e-13}


def solver_suite(n: int = 64, count: int = 0, seed: int = 5) -> list:
    return [
        check_steady_presets(n),
        check_linear_column_solution(n),
        check_scaling_group_law(n, seed),
        check_mean_conservation(n),
    ]


# ------------------------------------------------------- diagnostics suite

def check_lifespan_anchor() -> dict:
    bound = lifespan_lower_bound_2d(1.0, 1.0, 1.0).bound
    expected = math.log1p(0.5 * math.log(2.0))
    err = abs(bound - expected)
    return {"check": "lifespan_anchor", "n": 0, "error": err,
            "passed": err <= 1e-15}


def check_lambda_scaling(count: int = 100, seed: int = 31) -> dict:
    """bound(W, G, C) = lam * bound(lam*W, lam^2*G, C): the amplitude
    scaling leaves W^2/G invariant and divides the prefactor by lam."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        omega0, theta0, c = np.exp(rng.uniform(-2, 2, size=3))
        lam = float(np.exp(rng.uniform(-2, 2)))
        lhs = lifespan_lower_bound_2d(omega0, theta0, c).bound
        rhs = lam * lifespan_lower_bound_2d(lam * omega0, lam ** 2 * theta0, c).bound
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return {"check": "lambda_scaling_identity", "n": 0, "max_error": worst,
            "passed": worst <= 1e-12}


def check_bootstrap_inequality(grid_points: int = 2001) -> dict:
    """x <= exp(e^x - 1) - 1 on [0, 5]."""
    x = np.linspace(0.0, 5.0, grid_points)
    gap = np.expm1(np.expm1(x)) - x
    worst = float(gap.min())
    return {"check": "bootstrap_inequality", "n": 0, "min_gap": worst,
            "passed": worst >= 0.0}


def check_calderon_zygmund(n: int = 64, count: int = 20, seed: int = 11) -> dict:
    exact_err = 0.0
    worst_p4 = 0.0
    for omega in field_ensemble(n, count, seed):
        exact_err = max(exact_err, abs(calderon_zygmund_ratio(omega, 2.0) - 1.0))
        worst_p4 = max(worst_p4, calderon_zygmund_ratio(omega, 4.0))
    return {"check": "calderon_zygmund", "n": n, "ensemble_size": count,
            "l2_identity_error": exact_err, "max_ratio_p4": worst_p4,
            "passed": exact_err <= 1e-12 and worst_p4 <= 4.0}


def check_log_interpolation_stability(n_coarse: int = 64, n_fine: int = 128,
                                      count: int = 30, seed: int = 17,
                                      factor: float = 1.5) -> dict:
    from .diagnostics import log_interpolation_check
    pairs = paired_field_ensemble(n_coarse, n_fine, count, seed)
    coarse = log_interpolation_check([c for c, _ in pairs])
    fine = log_interpolation_check([f for _, f in pairs])
    return {"test": "log_interpolation_stability",
            "check": "log_interpolation_stability", "n": n_fine,
            "ensemble_size": count, "max_ratio": fine["max_ratio"],
            "coarse_max_ratio": coarse["max_ratio"],
            "passed": fine["max_ratio"] <= factor * coarse["max_ratio"]}


def diagnostics_suite(n: int = 64, count: int = 20, seed: int = 11) -> list:
    return [
        check_lifespan_anchor(),
        check_lambda_scaling(),
        check_bootstrap_inequality(),
        check_calderon_zygmund(n, count, seed),
        check_log_interpolation_stability(n, 2 * n, max(count // 2, 5), seed),
    ]


SUITES = {
    "lp": lp_suite,
    "bony": bony_suite,
    "solver": solver_suite,
    "diagnostics": diagnostics_suite,
}


def _plain(value):
    """Strip numpy scalar types so reports serialize as JSON."""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def run_suite(name: str, **kwargs) -> dict:
    """Run one named suite (or 'all'); returns {suite, passed, checks}."""
    if name == "all":
        checks = []
        for fn in SUITES.values():
            checks.extend(fn(**kwargs))
    elif name in SUITES:
        checks = SUITES[name](**kwargs)
    else:
        raise ValueError(f"unknown suite {name!r}")
    checks = [_plain(c) for c in checks]
    return {"suite": name, "passed": all(c["passed"] for c in checks),
            "checks": checks}
