"""Plain ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Lengths accept ``pi`` multiples
such as ``2*pi`` or ``pi/2``. Unknown keys are errors.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .grid import GridSpec
from .solver import SCHEMES, SolverConfig

MODES = ("simulate", "picard", "verify", "analyticity")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


_PI = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_length(text: str) -> float:
    m = _PI.match(text)
    if m:
        num = {"": 1.0, "+": 1.0, "-": -1.0}.get(m.group(1))
        if num is None:
            num = float(m.group(1))
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(text)


def _uint64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return v


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, help)
KEYS: dict[str, tuple] = {
    "grid.n1": (int, 64, "x1 samples (even)"),
    "grid.n2": (int, 63, "interior x2 samples"),
    "grid.L1": (parse_length, 2 * math.pi, "strip period in x1"),
    "grid.L2": (parse_length, math.pi, "strip height"),
    "grid.dealias": (Fraction, Fraction(2, 3), "dealiasing fraction"),
    "solver.dt": (float, 1e-3, "time step / Picard node spacing"),
    "solver.t_end": (float, 1.0, "final time"),
    "solver.scheme": (str, "integrating_factor_rk4", "one of " + ", ".join(SCHEMES)),
    "solver.snapshot_stride": (int, 10, "steps between snapshots"),
    "solver.picard_max_iter": (int, 50, "Picard iteration cap"),
    "solver.picard_tol": (float, 1e-10, "Picard stopping tolerance"),
    "solver.quadrature_nodes": (int, 4, "trapezoid nodes per Duhamel interval"),
    "solver.holder_a": (float, 0.25, "Hoelder exponent of the monitor"),
    "solver.holder_pairs": (int, 2048, "sampled pairs of the Hoelder monitor"),
    "init.preset": (str, "two_mode", "initial data preset"),
    "init.file": (str, "", "FieldFile with initial data (overrides init.preset)"),
    "init.amplitude": (float, 1.0, "preset amplitude"),
    "init.k": (int, None, "single_mode x1 index"),
    "init.m": (int, None, "single_mode x2 index"),
    "init.x0": (parse_length, None, "bump centre x1"),
    "init.y0": (parse_length, None, "interior_bump centre x2"),
    "init.width": (parse_length, None, "bump radius"),
    "init.j_lo": (int, None, "random_band lowest shell"),
    "init.j_hi": (int, None, "random_band highest shell"),
    "mode": (str, "simulate", "one of " + ", ".join(MODES)),
    "output.dir": (str, "sqg_out", "output directory"),
    "output.gnuplot": (_bool, False, "write a gnuplot script next to the CSV"),
    "seed": (_uint64, 0, "seed for random presets and audits"),
    "analyticity.beta_max": (int, 8, "highest derivative order"),
    "verify.pairs": (int, 20, "random pairs in the bilinear audit"),
}

_PRESET_KEYS = ("amplitude", "k", "m", "x0", "y0", "width", "j_lo", "j_hi")


@dataclass
class RunConfig:
    grid: GridSpec
    solver: SolverConfig
    initial_data: dict
    mode: str
    output_dir: Path
    seed: int
    extras: dict = field(default_factory=dict)


def defaults_help() -> str:
    width = max(len(k) for k in KEYS)
    rows = []
    for key, (_, default, text) in KEYS.items():
        shown = "" if default is None else str(default)
        rows.append(f"  {key:<{width}}  {shown:<24} {text}")
    return "config keys (default, meaning):\n" + "\n".join(rows)


def parse_lines(lines, overrides=()) -> dict:
    raw: dict[str, tuple[str, int | None]] = {}
    for n, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"expected key = value, got {line.strip()!r}", n)
        key, value = (s.strip() for s in text.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", n)
        raw[key] = (value, n)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r} in --set")
        raw[key] = (value, None)

    values = {}
    for key, (parser, default, _) in KEYS.items():
        if key in raw and raw[key][0] != "":
            text, n = raw[key]
            try:
                values[key] = parser(text)
            except (ValueError, ZeroDivisionError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}", n) from None
        else:
            values[key] = default
    return values


def build(values: dict) -> RunConfig:
    try:
        grid = GridSpec(values["grid.n1"], values["grid.n2"], values["grid.L1"],
                        values["grid.L2"], values["grid.dealias"])
        solver = SolverConfig(
            dt=values["solver.dt"], t_end=values["solver.t_end"],
            scheme=values["solver.scheme"],
            snapshot_stride=values["solver.snapshot_stride"],
            picard_max_iter=values["solver.picard_max_iter"],
            picard_tol=values["solver.picard_tol"],
            quadrature_nodes=values["solver.quadrature_nodes"],
            holder_a=values["solver.holder_a"], holder_pairs=values["solver.holder_pairs"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if values["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    params = {k: values["init." + k] for k in _PRESET_KEYS if values["init." + k] is not None}
    if values["init.preset"] == "random_band":
        params["seed"] = values["seed"]
    init = {"preset": values["init.preset"], "file": values["init.file"], "params": params}
    extras = {k: values[k] for k in ("analyticity.beta_max", "verify.pairs", "output.gnuplot")}
    return RunConfig(grid, solver, init, values["mode"], Path(values["output.dir"]),
                     values["seed"], extras)


def load(path, overrides=()) -> RunConfig:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return build(parse_lines(lines, overrides))
