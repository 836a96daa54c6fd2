"""Command-line driver: ``peridyn run|convergence|compare <config.toml>``.

A run config is a TOML file that fully reconstructs a simulation or study;
configs round-trip losslessly through :func:`load_config` /
:func:`dump_config`, and every output directory receives the effective
config alongside a JSON metadata file with solver statistics.

Exit codes: 0 success, 2 config error, 3 numerical abort, 4 ordering
failure in ``compare``.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

try:
    import tomllib as _toml
except ModuleNotFoundError:  # python < 3.11
    import tomli as _toml

from . import __version__
from .errors import (
    ConfigError,
    KrylovStallError,
    NewtonDivergenceError,
    NonFiniteFieldError,
    PeridynError,
    ValidationError,
)
from .experiments import (
    BenchmarkSpec,
    PenalizationSettings,
    integrator_comparison,
    spatial_convergence_study,
    temporal_convergence_study,
)
from .grid import Field, build_grid, field_from_function, write_csv, write_snapshot
from .integrators import State, TimeConfig, integrate
from .operator import OperatorSpec
from .penalization import PenalizationConfig, extend_domain
from .presets import make_forcing, make_initial_condition, make_kernel_function
from .spectral import build_kernel

SMOKE_T_EVAL = 1.0
SMOKE_DT = 1e-3


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reconstruct a run or study."""

    a: float = 0.0
    b: float = 1.0
    n_points: int = 100
    kernel_name: str = "gaussian"
    kernel_params: dict = field(default_factory=dict)
    delta: float = 0.2
    r: int = 3
    density: float = 1.0
    ic_name: str = "linear_ramp"
    ic_params: dict = field(default_factory=dict)
    forcing_name: str = "none"
    forcing_params: dict = field(default_factory=dict)
    dt: float = 1e-4
    t_final: float = 10.0
    beta: float = 0.25
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    krylov_tol: float = 1e-12
    krylov_max_iter: int = 200
    pen_enabled: bool = False
    pen_mu: float = 0.2
    pen_epsilon: float = 0.2
    pen_constraint: float = 0.0
    pen_variant: str = "displacement"
    out_dir: str = "out"
    snapshot_times: tuple = ()
    study_resolutions: tuple = ()
    study_dts: tuple = ()
    study_t_eval: float = 5.0

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return asdict(self) == asdict(other)


_SECTIONS = {
    "domain": {"a": float, "b": float, "n_points": int},
    "kernel": {"name": str, "params": dict, "delta": float},
    "operator": {"r": int, "density": float},
    "initial": {"name": str, "params": dict},
    "forcing": {"name": str, "params": dict},
    "time": {
        "dt": float,
        "t_final": float,
        "beta": float,
        "newton_tol": float,
        "newton_max_iter": int,
        "krylov_tol": float,
        "krylov_max_iter": int,
    },
    "penalization": {
        "enabled": bool,
        "mu": float,
        "epsilon": float,
        "constraint_value": float,
        "variant": str,
    },
    "output": {"directory": str, "snapshot_times": list},
    "study": {"resolutions": list, "dts": list, "t_eval": float},
}

_KEY_MAP = {
    ("domain", "a"): "a",
    ("domain", "b"): "b",
    ("domain", "n_points"): "n_points",
    ("kernel", "name"): "kernel_name",
    ("kernel", "params"): "kernel_params",
    ("kernel", "delta"): "delta",
    ("operator", "r"): "r",
    ("operator", "density"): "density",
    ("initial", "name"): "ic_name",
    ("initial", "params"): "ic_params",
    ("forcing", "name"): "forcing_name",
    ("forcing", "params"): "forcing_params",
    ("time", "dt"): "dt",
    ("time", "t_final"): "t_final",
    ("time", "beta"): "beta",
    ("time", "newton_tol"): "newton_tol",
    ("time", "newton_max_iter"): "newton_max_iter",
    ("time", "krylov_tol"): "krylov_tol",
    ("time", "krylov_max_iter"): "krylov_max_iter",
    ("penalization", "enabled"): "pen_enabled",
    ("penalization", "mu"): "pen_mu",
    ("penalization", "epsilon"): "pen_epsilon",
    ("penalization", "constraint_value"): "pen_constraint",
    ("penalization", "variant"): "pen_variant",
    ("output", "directory"): "out_dir",
    ("output", "snapshot_times"): "snapshot_times",
    ("study", "resolutions"): "study_resolutions",
    ("study", "dts"): "study_dts",
    ("study", "t_eval"): "study_t_eval",
}


def parse_config_text(text: str) -> RunConfig:
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    kwargs = {}
    for section, table in raw.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in table.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            want = _SECTIONS[section][key]
            attr = _KEY_MAP[(section, key)]
            if want is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"[{section}].{key} must be a number")
                kwargs[attr] = float(value)
            elif want is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"[{section}].{key} must be an integer")
                kwargs[attr] = int(value)
            elif want is bool:
                if not isinstance(value, bool):
                    raise ConfigError(f"[{section}].{key} must be a boolean")
                kwargs[attr] = value
            elif want is str:
                if not isinstance(value, str):
                    raise ConfigError(f"[{section}].{key} must be a string")
                kwargs[attr] = value
            elif want is dict:
                if not isinstance(value, dict):
                    raise ConfigError(f"[{section}].{key} must be a table")
                kwargs[attr] = dict(value)
            elif want is list:
                if not isinstance(value, list):
                    raise ConfigError(f"[{section}].{key} must be an array")
                if attr == "study_resolutions":
                    kwargs[attr] = tuple(int(v) for v in value)
                else:
                    kwargs[attr] = tuple(float(v) for v in value)
    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        r = repr(value)
        # TOML floats need a dot or exponent
        return r if any(c in r for c in ".eE") else r + ".0"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {value!r}")


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        subtables = []
        for key in keys:
            attr = _KEY_MAP[(section, key)]
            value = getattr(cfg, attr)
            if isinstance(value, dict):
                if value:
                    subtables.append((f"{section}.{key}", value))
                continue
            lines.append(f"{key} = {_toml_scalar(value)}")
        for name, table in subtables:
            lines.append(f"[{name}]")
            for k, v in table.items():
                lines.append(f"{k} = {_toml_scalar(v)}")
        lines.append("")
    return "\n".join(lines)


def _benchmark_from_config(cfg: RunConfig) -> BenchmarkSpec:
    return BenchmarkSpec(
        benchmark_id=f"{cfg.ic_name}/{cfg.kernel_name}/r{cfg.r}",
        a=cfg.a,
        b=cfg.b,
        kernel_name=cfg.kernel_name,
        kernel_params=dict(cfg.kernel_params),
        delta=cfg.delta,
        r=cfg.r,
        beta=cfg.beta,
        density=cfg.density,
        ic_name=cfg.ic_name,
        ic_params=dict(cfg.ic_params),
    )


def _pen_settings(cfg: RunConfig) -> PenalizationSettings | None:
    if not cfg.pen_enabled:
        return None
    return PenalizationSettings(
        cfg.pen_mu, cfg.pen_epsilon, cfg.pen_constraint, cfg.pen_variant
    )


def _validate_names(cfg: RunConfig) -> None:
    make_kernel_function(cfg.kernel_name, dict(cfg.kernel_params))
    make_initial_condition(cfg.ic_name, dict(cfg.ic_params))
    make_forcing(cfg.forcing_name, dict(cfg.forcing_params))


def _prepare(cfg: RunConfig):
    _validate_names(cfg)
    grid = build_grid(cfg.a, cfg.b, cfg.n_points)
    pen = None
    domain = grid
    if cfg.pen_enabled:
        domain, mask = extend_domain(grid, cfg.pen_mu)
        pen = PenalizationConfig(
            mask, cfg.pen_epsilon, cfg.pen_constraint, cfg.pen_variant, cfg.pen_mu
        )
        if cfg.pen_mu * grid.period < cfg.delta - 1e-12:
            print(
                f"warning: frame width {cfg.pen_mu * grid.period:g} is thinner than the "
                f"horizon {cfg.delta:g}; periodic wraparound can reach the physical domain",
                file=sys.stderr,
            )
    kernel = build_kernel(
        make_kernel_function(cfg.kernel_name, dict(cfg.kernel_params)), cfg.delta, domain
    )
    spec = OperatorSpec(
        kernel,
        r=cfg.r,
        density=cfg.density,
        forcing=make_forcing(cfg.forcing_name, dict(cfg.forcing_params)),
    )
    u0 = field_from_function(domain, make_initial_condition(cfg.ic_name, dict(cfg.ic_params)))
    state = State(u0, Field(domain, np.zeros_like(u0.values)), 0.0, 0)
    tcfg = TimeConfig(
        cfg.dt,
        cfg.t_final,
        beta=cfg.beta,
        newton_tol=cfg.newton_tol,
        newton_max_iter=cfg.newton_max_iter,
        krylov_tol=cfg.krylov_tol,
        krylov_max_iter=cfg.krylov_max_iter,
    )
    return spec, state, tcfg, pen


def _newton_stats(counts) -> dict:
    if not counts:
        return {"total": 0}
    return {
        "total": int(sum(counts)),
        "median_per_step": float(statistics.median(counts)),
        "max_per_step": int(max(counts)),
    }


def _wall_stats(wall) -> dict:
    if not wall:
        return {"total_s": 0.0}
    return {
        "total_s": float(sum(wall)),
        "mean_per_step_s": float(statistics.mean(wall)),
        "max_per_step_s": float(max(wall)),
    }


def _write_metadata(out: Path, cfg: RunConfig, extra: dict) -> None:
    meta = {"peridyn_version": __version__, "config": asdict(cfg)}
    meta.update(extra)
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    (out / "config.toml").write_text(dump_config(cfg))


def _out_dir(cfg: RunConfig, override) -> Path:
    out = Path(override) if override else Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(cfg: RunConfig, out_override=None, smoke=False, csv=False) -> int:
    if smoke:
        t_final = min(cfg.t_final, SMOKE_T_EVAL)
        cfg = replace(
            cfg,
            t_final=t_final,
            snapshot_times=tuple(t for t in cfg.snapshot_times if t <= t_final + 1e-12),
        )
    spec, state, tcfg, pen = _prepare(cfg)
    out = _out_dir(cfg, out_override)
    result = integrate(state, spec, tcfg, cfg.snapshot_times, pen)
    files = []
    for s in result.states:
        name = f"snapshot_t{s.t:g}.pdfld"
        write_snapshot(out / name, s.u, s.t)
        files.append(name)
        if csv:
            write_csv(out / f"snapshot_t{s.t:g}.csv", s.u)
    _write_metadata(
        out,
        cfg,
        {
            "command": "run",
            "n_steps": len(result.newton_iterations),
            "snapshots": files,
            "newton": _newton_stats(result.newton_iterations),
            "wall_clock": _wall_stats(result.step_wall_s),
        },
    )
    print(f"run complete: {len(result.newton_iterations)} steps, "
          f"{len(files)} snapshots -> {out}")
    return 0


def cmd_convergence(cfg: RunConfig, axis: str, out_override=None, smoke=False, threads=1) -> int:
    bench = _benchmark_from_config(cfg)
    _validate_names(cfg)
    t_eval = SMOKE_T_EVAL if smoke else cfg.study_t_eval
    if axis == "space":
        if not cfg.study_resolutions:
            raise ConfigError("[study].resolutions is empty")
        dt = SMOKE_DT if smoke else cfg.dt
        cfg = replace(cfg, dt=dt, study_t_eval=t_eval)
        table = spatial_convergence_study(
            bench,
            cfg.study_resolutions,
            dt,
            t_eval,
            pen_settings=_pen_settings(cfg),
            threads=threads,
        )
    elif axis == "time":
        if not cfg.study_dts:
            raise ConfigError("[study].dts is empty")
        cfg = replace(cfg, study_t_eval=t_eval)
        table = temporal_convergence_study(
            bench, cfg.study_dts, cfg.n_points, t_eval, threads=threads
        )
    else:
        raise ConfigError(f"axis must be 'space' or 'time', got {axis!r}")
    out = _out_dir(cfg, out_override)
    (out / "table.csv").write_text(table.to_csv_text())
    (out / "table.txt").write_text(table.to_text())
    _write_metadata(out, cfg, {"command": f"convergence --axis {axis}", "smoke": smoke})
    print(table.to_text(), end="")
    return 0


def cmd_compare(cfg: RunConfig, out_override=None, smoke=False, threads=1) -> int:
    bench = _benchmark_from_config(cfg)
    _validate_names(cfg)
    if not cfg.study_dts:
        raise ConfigError("[study].dts is empty")
    t_eval = SMOKE_T_EVAL if smoke else cfg.study_t_eval
    cfg = replace(cfg, study_t_eval=t_eval)
    table = integrator_comparison(bench, cfg.study_dts, cfg.n_points, t_eval, threads=threads)
    out = _out_dir(cfg, out_override)
    (out / "comparison.csv").write_text(table.to_csv_text())
    (out / "comparison.txt").write_text(table.to_text())
    _write_metadata(out, cfg, {"command": "compare", "smoke": smoke})
    print(table.to_text(), end="")
    if not table.ordering_holds():
        print("ordering violated: a Newmark error exceeds the Stormer-Verlet error",
              file=sys.stderr)
        return 4
    return 0


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("PERIDYN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PERIDYN_THREADS={env!r} is not an integer") from None
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peridyn",
        description="2D nonlinear peridynamic solver (Fourier collocation + Newmark-beta)",
    )
    parser.add_argument("--version", action="version", version=f"peridyn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="TOML run configuration")
        p.add_argument("--out", help="output directory (overrides [output].directory)")
        p.add_argument("--threads", type=int, default=None,
                       help="parallel study rows (fallback: PERIDYN_THREADS)")
        p.add_argument("--smoke", action="store_true",
                       help="reduced tier: evaluate at t = 1 (and dt = 1e-3 for spatial studies)")

    p_run = sub.add_parser("run", help="integrate one configuration and write snapshots")
    common(p_run)
    p_run.add_argument("--csv", action="store_true", help="also export snapshots as CSV")

    p_conv = sub.add_parser("convergence", help="spatial or temporal convergence table")
    common(p_conv)
    p_conv.add_argument("--axis", choices=("space", "time"), required=True)

    p_cmp = sub.add_parser("compare", help="Newmark vs Stormer-Verlet error table")
    common(p_cmp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        threads = _threads(args)
        if args.command == "run":
            return cmd_run(cfg, args.out, args.smoke, args.csv)
        if args.command == "convergence":
            return cmd_convergence(cfg, args.axis, args.out, args.smoke, threads)
        return cmd_compare(cfg, args.out, args.smoke, threads)
    except (ConfigError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonFiniteFieldError, NewtonDivergenceError, KrylovStallError) as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    except PeridynError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
