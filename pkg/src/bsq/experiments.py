"""Simulation runs, the temperature-scaling sweep, and calibration.

A run writes per-step diagnostics to ``diag.csv``, strided field
snapshots in the binary format, and a ``summary.json`` with the stop
reason and conservation drifts. The sweep repeats a run with the
temperature amplitude scaled by each epsilon (vorticity fixed), records
the numerical lifespan proxy per row, and evaluates the closed-form
lower bound from each row's own initial norms with a single calibrated
constant.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig, build_initial_state
from .diagnostics import (
    CSV_COLUMNS,
    csv_row,
    lifespan_lower_bound_2d,
    transport_bound_check,
)
from .fields import to_physical, write_bsqf
from .solver import simulate


def _write_diag_header(fh):
    writer = csv.writer(fh)
    writer.writerow(CSV_COLUMNS)
    return writer


def run_simulation(cfg: RunConfig, *, theta_scale: float = 1.0,
                   out_dir=None, write: bool = True):
    """Run one simulation, writing artifacts; returns (Trajectory, summary)."""
    initial = build_initial_state(cfg, theta_scale)
    out = Path(out_dir if out_dir is not None else cfg.out_dir)

    diag_fh = None
    writer = None
    if write:
        out.mkdir(parents=True, exist_ok=True)
        diag_fh = open(out / "diag.csv", "w", newline="")
        writer = _write_diag_header(diag_fh)

    def on_record(rec):
        if writer is not None:
            writer.writerow(csv_row(rec))

    try:
        traj = simulate(initial, cfg.solver, r=cfg.r,
                        snapshot_stride=cfg.snapshot_stride, on_record=on_record)
    finally:
        if diag_fh is not None:
            diag_fh.close()

    first, last = traj.records[0], traj.records[-1]
    summary = {
        "preset": cfg.preset,
        "theta_scale": theta_scale,
        "n": cfg.solver.grid.n,
        "spectral_filter": cfg.solver.spectral_filter,
        "final_t": last.t,
        "trigger": traj.trigger,
        "trigger_time": traj.trigger_time,
        "steps": len(traj.records) - 1,
        "theta_l2_drift": (abs(last.theta_l2 - first.theta_l2)
                           / max(first.theta_l2, 1e-300)),
        "theta_min_drift": abs(last.theta_min - first.theta_min),
        "theta_max_drift": abs(last.theta_max - first.theta_max),
        "Omega0": first.Omega,
        "Theta0": first.Theta,
    }
    if write:
        for step, state in traj.snapshots:
            write_bsqf(out / f"theta_{step:08d}.bsqf", to_physical(state.theta))
            write_bsqf(out / f"omega_{step:08d}.bsqf", to_physical(state.omega))
        with open(out / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2)
    return traj, summary


@dataclass(frozen=True)
class SweepRow:
    eps: float
    T_num: float
    trigger: str
    Omega0: float
    Theta0: float
    T_bound: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    C: float


def _sweep_worker(args):
    cfg, eps, out_dir = args
    traj, summary = run_simulation(cfg, theta_scale=eps, out_dir=out_dir,
                                   write=out_dir is not None)
    return eps, summary, list(traj.records)


def _max_workers(n_jobs):
    env = os.environ.get("BSQ_THREADS")
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(n_jobs, cap))


def run_sweep(cfg: RunConfig, eps_list, *, out_dir=None, write: bool = True) -> SweepResult:
    """Run the theta-scaling sweep and evaluate lifespan bounds per row.

    The vorticity amplitude is held fixed while theta0 is scaled by
    each epsilon (strictly decreasing, positive). The constant C is
    calibrated once, from the largest-epsilon trajectory's transport
    bounds, then applied to every row's own initial norms.
    """
    eps_list = [float(e) for e in eps_list]
    if not eps_list or any(e <= 0.0 for e in eps_list):
        raise ValueError("epsilon values must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("epsilon values must be strictly decreasing")

    out = Path(out_dir if out_dir is not None else cfg.out_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, eps, str(out / f"eps_{eps:g}") if write else None)
            for eps in eps_list]

    workers = _max_workers(len(jobs))
    results = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for eps, summary, records in pool.map(_sweep_worker, jobs):
                results[eps] = (summary, records)
    else:
        for job in jobs:
            eps, summary, records = _sweep_worker(job)
            results[eps] = (summary, records)

    calib = transport_bound_check(results[eps_list[0]][1], 0.0)
    C = calib["C_min"]

    rows = []
    for eps in eps_list:
        summary, records = results[eps]
        omega0, theta0 = records[0].Omega, records[0].Theta
        if C > 0.0 and theta0 > 0.0 and omega0 > 0.0:
            t_bound = lifespan_lower_bound_2d(omega0, theta0, C).bound
        else:
            t_bound = math.inf
        rows.append(SweepRow(eps=eps, T_num=summary["final_t"],
                             trigger=summary["trigger"], Omega0=omega0,
                             Theta0=theta0, T_bound=t_bound))

    result = SweepResult(rows=tuple(rows), C=float(C))
    if write:
        with open(out / "sweep.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["eps", "T_num", "trigger", "Omega0", "Theta0",
                             "T_bound"])
            for row in result.rows:
                writer.writerow([repr(row.eps), repr(row.T_num), row.trigger,
                                 repr(row.Omega0), repr(row.Theta0),
                                 repr(row.T_bound)])
        with open(out / "calibration.json", "w") as fh:
            json.dump({"C": result.C, "source": "transport_bound_check",
                       "eps": eps_list[0]}, fh, indent=2)
    return result


def _trajectory_hash(records) -> str:
    digest = hashlib.sha256()
    for rec in records:
        digest.update(",".join(csv_row(rec)).encode())
    return digest.hexdigest()


def calibrate(cfg: RunConfig, *, out_dir=None, write: bool = True) -> dict:
    """Calibrate the transport-bound constant from one trajectory.

    Runs the configured trajectory, requires at least 10 records, and
    returns {"C", "trajectory_hash"}; also writes calibration.json.
    """
    traj, _ = run_simulation(cfg, out_dir=out_dir, write=write)
    if len(traj.records) < 10:
        raise ValueError(
            f"calibration trajectory too short: {len(traj.records)} records "
            "(need at least 10)")
    report = transport_bound_check(traj, 0.0)
    payload = {"C": report["C_min"], "trajectory_hash": _trajectory_hash(traj.records)}
    if write:
        out = Path(out_dir if out_dir is not None else cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "calibration.json", "w") as fh:
            json.dump(payload, fh, indent=2)
    return payload
