"""Plain-text artifacts: grid and field dumps, CSV tables, JSON metadata.

Every number is written with ``%.17e`` so that files round-trip exactly and
do not depend on the locale.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .driver import NOT_REACHED, CaseResult, SweepTable

SERIES_HEADER = ("t_seconds", "mean_coverage_mol_per_m2", "min_a", "max_a")
SWEEP_COLUMNS = ("voltage_V", "dT_max_K", "v_down_max_m_per_s", "u_max_m_per_s",
                 "t_steady_s")
AXIS_COLUMNS = {
    "electrode_width": "electrode_width_m",
    "gap": "electrode_gap_m",
    "frequency": "frequency_Hz",
    "voltage": "voltage_V",
}

FMT = "%.17e"


def fmt(x) -> str:
    return FMT % float(x)


def write_grid(grid, path) -> Path:
    """Header ``nx ny dx dy`` then one line of ``cell_kind`` codes per
    ``i`` (row-major over the ``(nx, ny)`` cell array)."""
    path = Path(path)
    kinds = grid.cell_kind
    with path.open("w", newline="\n") as fh:
        fh.write(f"{grid.nx} {grid.ny} {fmt(grid.dx)} {fmt(grid.dy)}\n")
        for row in kinds:
            fh.write(" ".join(str(int(k)) for k in row) + "\n")
    return path


def read_grid(path):
    """Inverse of :func:`write_grid`; returns ``(nx, ny, dx, dy, codes)``."""
    lines = Path(path).read_text().split("\n")
    nx, ny, dx, dy = lines[0].split()
    nx, ny = int(nx), int(ny)
    codes = np.array([[int(c) for c in ln.split()] for ln in lines[1:1 + nx]], dtype=np.int8)
    if codes.shape != (nx, ny):
        raise ValueError(f"grid dump body has shape {codes.shape}, header says {(nx, ny)}")
    return nx, ny, float(dx), float(dy), codes


def write_field(path, name: str, units: str, values, dx: float, dy: float) -> Path:
    """Structured text dump of one 2-D array.

    Line 1 ``# name [units]``, line 2 ``rows cols dx dy``, then one line per
    row. Face arrays are written with their own (staggered) shape.
    """
    path = Path(path)
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError("field dumps are 2-D")
    with path.open("w", newline="\n") as fh:
        fh.write(f"# {name} [{units}]\n")
        fh.write(f"{arr.shape[0]} {arr.shape[1]} {fmt(dx)} {fmt(dy)}\n")
        for row in arr:
            fh.write(" ".join(fmt(v) for v in row) + "\n")
    return path


def read_field(path):
    """Returns ``(name, units, array)`` from a :func:`write_field` file."""
    lines = Path(path).read_text().split("\n")
    head = lines[0][2:]
    name, _, units = head.partition(" [")
    rows, cols = (int(v) for v in lines[1].split()[:2])
    arr = np.array([[float(v) for v in ln.split()] for ln in lines[2:2 + rows]])
    return name, units.rstrip("]"), arr.reshape(rows, cols)


def dump_case_fields(result: CaseResult, grid, directory) -> list:
    """Write every steady field of a case kept with ``keep_fields=True``."""
    if result.fields is None:
        raise ValueError("case was run without keep_fields")
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    f = result.fields
    dx, dy = grid.dx, grid.dy
    items = [
        ("phi", "V", f.potential.phi),
        ("E2", "V^2/m^2", f.efield.e2),
        ("T", "K", f.temperature.t),
        ("q_joule", "W/m^3", f.heat),
        ("fx", "N/m^3", f.force.fx),
        ("fy", "N/m^3", f.force.fy),
        ("u", "m/s", f.flow.u),
        ("v", "m/s", f.flow.v),
        ("p", "Pa", f.flow.p),
    ]
    if result.concentration is not None:
        items.append(("a_final", "mol/m^3", result.concentration))
    paths = [write_grid(grid, d / "grid.txt")]
    for name, units, arr in items:
        paths.append(write_field(d / f"{name}.txt", name, units, arr, dx, dy))
    return paths


def write_series_csv(series, path) -> Path:
    path = Path(path)
    s = np.asarray(series, dtype=float).reshape(-1, len(SERIES_HEADER))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for row in s:
            w.writerow([fmt(v) for v in row])
    return path


def read_series_csv(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != SERIES_HEADER:
        raise ValueError(f"unexpected series header {rows[0]}")
    return np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(SERIES_HEADER))


def sweep_header(axis: str) -> list:
    head = list(SWEEP_COLUMNS)
    if axis != "voltage":
        head.insert(0, AXIS_COLUMNS[axis])
    return head + ["status"]


def sweep_rows(table: SweepTable) -> list:
    out = []
    for row in table.rows:
        res = row.result
        line = []
        if table.axis != "voltage":
            line.append(fmt(row.value))
        line.append(fmt(row.config.drive.v_rms))
        if res is None:
            line += ["", "", "", "", "error: " + (row.error or "unknown")]
        else:
            t = NOT_REACHED if res.t_steady is None else fmt(res.t_steady)
            line += [fmt(res.dT_max), fmt(res.v_down_max), fmt(res.u_max), t, "ok"]
        out.append(line)
    return out


def write_sweep_csv(table: SweepTable, path) -> Path:
    """Table with the columns ``voltage_V, dT_max_K, v_down_max_m_per_s,
    u_max_m_per_s, t_steady_s``; other axes get their own leading column, and
    a trailing ``status`` column records per-row errors."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(sweep_header(table.axis))
        w.writerows(sweep_rows(table))
    return path


def read_sweep_csv(path) -> list:
    """Rows as dicts; numbers parsed, ``not reached`` and blanks kept as ``None``."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        d = {}
        for k, v in r.items():
            if k == "status":
                d[k] = v
            else:
                d[k] = None if v in ("", NOT_REACHED) else float(v)
        out.append(d)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def write_json(data, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def case_summary(result: CaseResult) -> dict:
    return {
        "dT_max_K": result.dT_max,
        "u_max_m_per_s": result.u_max,
        "v_down_max_m_per_s": result.v_down_max,
        "t_steady_s": result.t_steady if result.t_steady is not None else NOT_REACHED,
        "ab_eq_mol_per_m2": result.ab_eq,
        "coupling_iterations": result.coupling_iterations,
        "wall_time_s": result.wall_time,
        "checks": result.checks,
    }
