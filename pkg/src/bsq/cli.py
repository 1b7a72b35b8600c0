"""Command-line front end.

Subcommands::

    bsq simulate -c run.cfg
    bsq sweep -c run.cfg --eps 1,0.5,0.25,0.1,0.01
    bsq verify --suite {lp,bony,solver,diagnostics,all} [--n N] [--count K]
    bsq calibrate -c cal.cfg

Exit codes: 0 success, 1 run/validation/verification failure, 2 usage.
The environment variable BSQ_THREADS caps the sweep worker pool.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import ConfigError, parse_run_config
from .experiments import calibrate, run_simulation, run_sweep
from .verification import run_suite


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bsq",
        description="2D inviscid Boussinesq simulations with dyadic diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one simulation from a config")
    p_sim.add_argument("-c", "--config", required=True, help="config file path")

    p_sweep = sub.add_parser("sweep", help="temperature-scaling lifespan sweep")
    p_sweep.add_argument("-c", "--config", required=True)
    p_sweep.add_argument("--eps", required=True,
                         help="comma-separated positive decreasing scales")

    p_verify = sub.add_parser("verify", help="run property verification suites")
    p_verify.add_argument("--suite", required=True,
                          choices=["lp", "bony", "solver", "diagnostics", "all"])
    p_verify.add_argument("--n", type=int, default=64, help="grid size")
    p_verify.add_argument("--count", type=int, default=20, help="ensemble size")
    p_verify.add_argument("--seed", type=int, default=1234)

    p_cal = sub.add_parser("calibrate", help="calibrate the transport constant")
    p_cal.add_argument("-c", "--config", required=True)
    return parser


def _cmd_simulate(args) -> int:
    cfg = parse_run_config(args.config)
    _, summary = run_simulation(cfg)
    print(json.dumps(summary, indent=2))
    return 0


def _cmd_sweep(args) -> int:
    cfg = parse_run_config(args.config)
    try:
        eps_list = [float(tok) for tok in args.eps.split(",") if tok.strip()]
    except ValueError as exc:
        print(f"bsq sweep: bad --eps list: {exc}", file=sys.stderr)
        return 2
    result = run_sweep(cfg, eps_list)
    payload = {
        "C": result.C,
        "rows": [{"eps": row.eps, "T_num": row.T_num, "trigger": row.trigger,
                  "Omega0": row.Omega0, "Theta0": row.Theta0,
                  "T_bound": row.T_bound} for row in result.rows],
    }
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_verify(args) -> int:
    report = run_suite(args.suite, n=args.n, count=args.count, seed=args.seed)
    print(json.dumps(report, indent=2))
    return 0 if report["passed"] else 1


def _cmd_calibrate(args) -> int:
    cfg = parse_run_config(args.config)
    payload = calibrate(cfg)
    print(json.dumps(payload, indent=2))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "sweep": _cmd_sweep,
        "verify": _cmd_verify,
        "calibrate": _cmd_calibrate,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"bsq {args.command}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"bsq {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
