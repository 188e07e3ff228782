"""Binary field snapshots and deterministic CSV output.

FieldFile layout (little endian):

    b"SQGF" | u32 version=1 | u32 n1 | u32 n2 | f64 L1 | f64 L2 | f64 t | f64[n1*n2]

The payload is row-major in (i, j) with j (the x2 index) fastest.
"""
from __future__ import annotations

import math
import struct
from pathlib import Path

import numpy as np

from .grid import Field, GridSpec

MAGIC = b"SQGF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")

DIAGNOSTIC_COLUMNS = ("t", "linf", "l2", "besov0_inf_1", "besov1_inf_1", "holder_a",
                      "max_principle_ok")


class FieldFileError(ValueError):
    pass


def encode_field(f: Field, t: float) -> bytes:
    g = f.grid
    head = _HEADER.pack(MAGIC, VERSION, g.n1, g.n2, float(g.L1), float(g.L2), float(t))
    return head + np.ascontiguousarray(f.values, dtype="<f8").tobytes()


def decode_field(data: bytes, grid: GridSpec | None = None) -> tuple[Field, float]:
    """Parse a FieldFile image. ``grid`` supplies the dealias fraction if given."""
    if len(data) < _HEADER.size:
        raise FieldFileError("truncated FieldFile header")
    magic, version, n1, n2, L1, L2, t = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FieldFileError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FieldFileError(f"unsupported FieldFile version {version}")
    payload = data[_HEADER.size:]
    if len(payload) != n1 * n2 * 8:
        raise FieldFileError(f"payload holds {len(payload)} bytes, expected {n1 * n2 * 8}")
    values = np.frombuffer(payload, dtype="<f8").reshape(n1, n2).astype(float)
    if grid is None:
        grid = GridSpec(n1, n2, L1, L2)
    elif (grid.n1, grid.n2, grid.L1, grid.L2) != (n1, n2, L1, L2):
        raise FieldFileError("FieldFile geometry does not match the requested grid")
    return Field(grid, values), t


def write_field(path, f: Field, t: float) -> Path:
    path = Path(path)
    path.write_bytes(encode_field(f, t))
    return path


def read_field(path, grid: GridSpec | None = None) -> tuple[Field, float]:
    return decode_field(Path(path).read_bytes(), grid)


# CSV -------------------------------------------------------------------------------

def fmt(x) -> str:
    """Locale-free, round-trippable number formatting."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def diagnostics_csv(traj) -> str:
    lines = [",".join(DIAGNOSTIC_COLUMNS)]
    for t, d in zip(traj.times, traj.diagnostics):
        lines.append(",".join([fmt(t)] + [fmt(d[c]) for c in DIAGNOSTIC_COLUMNS[1:]]))
    return "\n".join(lines) + "\n"


def reports_csv(reports) -> str:
    from .analysis import EstimateReport

    lines = [EstimateReport.CSV_HEADER]
    for r in reports:
        notes = r.notes.replace('"', "'")
        lines.append(",".join([r.name, str(r.samples), fmt(r.fitted_constant),
                               fmt(r.fitted_exponent), fmt(r.worst_ratio), r.verdict,
                               f'"{notes}"']))
    return "\n".join(lines) + "\n"


def analyticity_csv(report) -> str:
    lines = ["kind,alpha,beta1,beta2,value"]
    for kind, a, b1, b2, v in report.entries():
        lines.append(f"{kind},{a},{b1},{b2},{fmt(v)}")
    lines.append(f"estimated_C,,,,{fmt(report.estimated_C)}")
    lines.append(f"estimated_C_joint,,,,{fmt(report.estimated_C_joint)}")
    lines.append(f"radius_fit,,,,{fmt(report.radius_fit)}")
    return "\n".join(lines) + "\n"


def gnuplot_script(csv_name: str, columns: list[str], title: str) -> str:
    plots = ", ".join(f"'{csv_name}' using 1:{i + 2} with lines title '{c}'"
                      for i, c in enumerate(columns))
    return ("set datafile separator ','\n"
            "set key autotitle columnhead\n"
            f"set title '{title}'\n"
            "set xlabel 't'\n"
            "set logscale y\n"
            f"plot {plots}\n")
