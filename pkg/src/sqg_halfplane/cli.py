"""Command line front end.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure
(non-finite state), 4 failed audit verdict or non-converged Picard iteration.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from . import fieldio
from .analysis import analyticity_diagnostic, run_battery
from .calculus import partition_for_grid
from .config import MODES, ConfigError, RunConfig, defaults_help, load
from .fieldio import FieldFileError
from .grid import forward_coeffs
from .presets import preset
from .solver import NumericalFailure, Trajectory, picard_solve, simulate, snapshot_diagnostics

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_AUDIT = 0, 2, 3, 4


def _initial_field(cfg: RunConfig):
    init = cfg.initial_data
    if init["file"]:
        f, _ = fieldio.read_field(init["file"], cfg.grid)
        return f
    try:
        return preset(init["preset"], cfg.grid, **init["params"])
    except TypeError as exc:
        raise ConfigError(f"bad parameters for preset {init['preset']!r}: {exc}") from None


def _write_snapshots(out: Path, traj: Trajectory):
    for n, (t, f) in enumerate(zip(traj.times, traj.states)):
        fieldio.write_field(out / f"snap_{n:06d}.sqgf", f, t)


def _write_diagnostics(out: Path, traj: Trajectory, gnuplot: bool):
    (out / "diagnostics.csv").write_text(fieldio.diagnostics_csv(traj))
    if gnuplot:
        script = fieldio.gnuplot_script("diagnostics.csv", list(fieldio.DIAGNOSTIC_COLUMNS[1:6]),
                                        "SQG diagnostics")
        (out / "diagnostics.gp").write_text(script)


def _run_simulate(cfg, out, gnuplot):
    traj = simulate(_initial_field(cfg), cfg.solver)
    _write_snapshots(out, traj)
    _write_diagnostics(out, traj, gnuplot)
    return EXIT_OK


def _run_picard(cfg, out, gnuplot):
    theta0 = _initial_field(cfg)
    res = picard_solve(theta0, cfg.solver.t_end, cfg.solver)
    traj = res.trajectory
    P = partition_for_grid(traj.grid)
    keep = Trajectory(traj.grid)
    stride = cfg.solver.snapshot_stride
    last = len(traj) - 1
    for n, (t, f) in enumerate(zip(traj.times, traj.states)):
        if n % stride == 0 or n == last:
            prev = keep.diagnostics[-1] if keep.diagnostics else None
            keep.append(t, f, snapshot_diagnostics(forward_coeffs(f.values), traj.grid, P,
                                                   cfg.solver, prev))
    _write_snapshots(out, keep)
    _write_diagnostics(out, keep, gnuplot)
    lines = ["iteration,contraction_ratio"]
    lines += [f"{i + 2},{fieldio.fmt(r)}" for i, r in enumerate(res.contraction_history)]
    lines.append(f"iterations,{res.iterations}")
    lines.append(f"converged,{fieldio.fmt(res.converged)}")
    lines.append(f"residual,{fieldio.fmt(res.residual)}")
    (out / "picard.csv").write_text("\n".join(lines) + "\n")
    if not res.converged:
        print(f"error: Picard iteration did not converge in {res.iterations} iterations",
              file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _run_verify(cfg, out, gnuplot):
    reports = run_battery(cfg.grid, cfg.seed, cfg.extras["verify.pairs"])
    (out / "reports.csv").write_text(fieldio.reports_csv(reports))
    bad = [r.name for r in reports if not r.passed]
    if bad:
        print(f"error: audit verdict not pass for {', '.join(bad)}", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _run_analyticity(cfg, out, gnuplot):
    traj = simulate(_initial_field(cfg), cfg.solver)
    _write_snapshots(out, traj)
    _write_diagnostics(out, traj, gnuplot)
    report = analyticity_diagnostic(traj, traj.times[-1], cfg.extras["analyticity.beta_max"])
    (out / "analyticity.csv").write_text(fieldio.analyticity_csv(report))
    return EXIT_OK


_RUNNERS = {
    "simulate": _run_simulate,
    "picard": _run_picard,
    "verify": _run_verify,
    "analyticity": _run_analyticity,
}


def execute(cfg: RunConfig, emit_gnuplot: bool = False) -> int:
    out = cfg.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: output directory {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    gnuplot = emit_gnuplot or cfg.extras.get("output.gnuplot", False)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _RUNNERS[cfg.mode](cfg, out, gnuplot)
    except NumericalFailure as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, FieldFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # preset range checks and similar input validation
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run(config_path, overrides=(), mode: str | None = None, emit_gnuplot: bool = False) -> int:
    """Load ``config_path``, apply ``--set`` overrides and execute; returns the exit code."""
    if mode is not None:
        overrides = [*overrides, f"mode={mode}"]
    try:
        cfg = load(config_path, overrides)
    except ConfigError as exc:
        print(f"error: {config_path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return execute(cfg, emit_gnuplot)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqg-halfplane",
        description="Critical SQG on the half-plane strip: simulation and estimate audits.",
        epilog=defaults_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="mode", required=True)
    blurbs = {
        "simulate": "time-step the equation and write snapshots and diagnostics",
        "picard": "solve the integral equation by fixed-point iteration",
        "verify": "run the built-in audit battery and write reports.csv",
        "analyticity": "simulate, then tabulate derivative bounds at t_end",
    }
    for name in MODES:
        p = sub.add_parser(name, help=blurbs[name], description=blurbs[name],
                           epilog=defaults_help(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, help="key = value configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--emit-gnuplot", action="store_true",
                       help="also write a gnuplot script for the diagnostics CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.config, args.set, args.mode, args.emit_gnuplot)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
