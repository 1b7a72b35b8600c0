"""Run configuration files: flat key-value text with two sections.

Schema (fail-closed: unknown sections or keys are errors)::

    [run]
    preset = vortex_pair        # stratified | shear | vortex_pair | random_seeded
    seed = 42                   # 64-bit, used by random_seeded
    eps_theta = 1.0             # amplitude of the temperature part
    eps_u = 1.0                 # amplitude of the vorticity part
    r = 2.0                     # Lebesgue exponent for intersection norms
    out_dir = runs/demo
    snapshot_stride = 0         # 0 disables snapshots

    [solver]
    n = 128                     # grid points per axis (even, >= 8)
    stop_time = 1.0
    cfl = 0.4
    dt_max = 0.05
    filter = none               # none | exponential
    tail_fraction = 1e-3        # blow-up proxy thresholds
    omega_growth = 100.0

``preset``, ``n`` and ``stop_time`` are required; everything else has
the defaults shown.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

from .fields import Grid
from .presets import PRESET_NAMES, initial_state
from .solver import SolverConfig, SolverState


class ConfigError(ValueError):
    """A configuration file failed validation."""


_RUN_KEYS = {"preset", "seed", "eps_theta", "eps_u", "r", "out_dir",
             "snapshot_stride"}
_SOLVER_KEYS = {"n", "stop_time", "cfl", "dt_max", "filter", "tail_fraction",
                "omega_growth"}


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of a run configuration file."""

    preset: str
    seed: int
    eps_theta: float
    eps_u: float
    r: float
    out_dir: str
    snapshot_stride: int
    solver: SolverConfig


def _line_of(text: str, key: str, section: str) -> str:
    """Best-effort 'file:line' pointer for an offending key."""
    in_section = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = stripped == f"[{section}]"
        elif in_section and stripped.split("=")[0].strip() == key:
            return f"line {lineno}"
    return f"section [{section}]"


def parse_run_config(path) -> RunConfig:
    with open(path, "r") as fh:
        text = fh.read()
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    known = {"run": _RUN_KEYS, "solver": _SOLVER_KEYS}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in known[section]:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in [{section}] "
                    f"({_line_of(text, key, section)})")
    for section in ("run", "solver"):
        if section not in parser:
            raise ConfigError(f"{path}: missing section [{section}]")

    run = parser["run"]
    sol = parser["solver"]

    def need(sec, key):
        if key not in sec:
            raise ConfigError(f"{path}: missing required key {key!r} in [{sec.name}]")
        return sec[key]

    try:
        preset = need(run, "preset")
        if preset not in PRESET_NAMES:
            raise ConfigError(
                f"{path}: unknown preset {preset!r} "
                f"({_line_of(text, 'preset', 'run')})")
        seed = int(run.get("seed", "0"))
        if not (-2 ** 63 <= seed < 2 ** 64):
            raise ConfigError(f"{path}: seed must fit in 64 bits")
        eps_theta = float(run.get("eps_theta", "1.0"))
        eps_u = float(run.get("eps_u", "1.0"))
        if eps_theta < 0 or eps_u < 0:
            raise ConfigError(f"{path}: amplitudes must be nonnegative")
        r = float(run.get("r", "2.0"))
        out_dir = run.get("out_dir", f"runs/{preset}")
        snapshot_stride = int(run.get("snapshot_stride", "0"))
        if snapshot_stride < 0:
            raise ConfigError(f"{path}: snapshot_stride must be >= 0")

        grid = Grid(int(need(sol, "n")))
        solver = SolverConfig(
            grid=grid,
            stop_time=float(need(sol, "stop_time")),
            cfl=float(sol.get("cfl", "0.4")),
            dt_max=float(sol.get("dt_max", "0.05")),
            spectral_filter=sol.get("filter", "none"),
            tail_fraction=float(sol.get("tail_fraction", "1e-3")),
            omega_growth=float(sol.get("omega_growth", "100.0")),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if not (1.0 < r):
        raise ConfigError(f"{path}: r must exceed 1, got {r}")
    return RunConfig(preset=preset, seed=seed, eps_theta=eps_theta, eps_u=eps_u,
                     r=r, out_dir=out_dir, snapshot_stride=snapshot_stride,
                     solver=solver)


def build_initial_state(cfg: RunConfig, theta_scale: float = 1.0) -> SolverState:
    """Initial state for a config, with an optional extra theta scaling."""
    return initial_state(cfg.preset, cfg.solver.grid,
                         eps_theta=cfg.eps_theta * theta_scale,
                         eps_u=cfg.eps_u, seed=cfg.seed)
