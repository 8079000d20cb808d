"""Result persistence: profile CSVs, result JSON, sweep tables.

Every file is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import DomainSpec, Field, Grid, Params, build_grid

__all__ = [
    "atomic_write_text",
    "write_json",
    "profile_text",
    "write_profile",
    "read_profile",
    "field_from_profile",
    "params_dict",
    "solve_result_dict",
    "sweep_csv_text",
]


def atomic_write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path: str | Path, payload: dict) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def grid_meta(grid: Grid) -> dict:
    d = grid.domain
    return {
        "kind": d.kind,
        "length_or_radius": _fmt(d.length_or_radius),
        "ball_dimension": "" if d.ball_dimension is None else str(d.ball_dimension),
        "n": str(grid.size - 2),
        "h": _fmt(grid.h),
    }


def profile_text(grid: Grid, values, meta: dict | None = None) -> str:
    """``# key=value`` header lines, a column header, then one row per node."""
    vals = np.asarray(values, dtype=float)
    header = dict(grid_meta(grid))
    for k, v in (meta or {}).items():
        header[k] = _fmt(v) if isinstance(v, (float, np.floating)) else str(v)
    out = io.StringIO()
    for k, v in header.items():
        out.write(f"# {k}={v}\n")
    out.write("coordinate,value\n")
    for x, y in zip(grid.nodes, vals):
        out.write(f"{_fmt(x)},{_fmt(y)}\n")
    return out.getvalue()


def write_profile(path: str | Path, grid: Grid, values, meta: dict | None = None) -> Path:
    return atomic_write_text(path, profile_text(grid, values, meta))


def read_profile(path: str | Path) -> tuple[dict, np.ndarray, np.ndarray]:
    """Return ``(header, coordinates, values)`` from a profile CSV."""
    meta: dict = {}
    coords, vals = [], []
    with open(path, encoding="utf-8", newline="") as fh:
        rows = []
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                meta[key.strip()] = value.strip()
            else:
                rows.append(line)
    reader = csv.reader(rows)
    next(reader)
    for row in reader:
        if row:
            coords.append(float(row[0]))
            vals.append(float(row[1]))
    return meta, np.array(coords), np.array(vals)


def field_from_profile(path: str | Path) -> Field:
    """Rebuild the grid named in a profile header and wrap the values as a Field."""
    meta, _, vals = read_profile(path)
    bd = meta.get("ball_dimension") or None
    domain = DomainSpec(meta["kind"], float(meta["length_or_radius"]), int(bd) if bd else None)
    grid = build_grid(domain, int(meta["n"]))
    return Field(vals, grid)


def params_dict(params: Params) -> dict:
    d = params.domain
    return {
        "dim": params.dim,
        "r": params.r,
        "p": params.p,
        "rho": params.rho,
        "eps": params.eps,
        "strict_paper_regime": params.strict_paper_regime,
        "domain": {
            "kind": d.kind,
            "length_or_radius": d.length_or_radius,
            "ball_dimension": d.ball_dimension,
        },
    }


def solve_result_dict(result, grid: Grid) -> dict:
    checks = {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v)) for k, v in result.checks.items()}
    return {
        "status": "passed" if result.passed else "failed",
        "params": params_dict(result.params),
        "grid": {"kind": grid.kind, "n": grid.size - 2, "h": grid.h, "volume": grid.volume},
        "geometry": result.geometry.as_dict(),
        "lambda": result.lam,
        "energy": result.energy,
        "mass": float(np.dot(grid.quad_weights, result.u.values**2)),
        "linf": result.u.max_abs(),
        "min_interior": result.u.min_interior(),
        "pairing_defect": result.pairing_defect,
        "residual_tol": result.residual_tol,
        "checks": checks,
        "log": result.log.as_dicts(),
    }


def sweep_csv_text(entries) -> str:
    """The lambda(rho), c(rho), |u|_inf(rho) table, one row per mass."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["rho", "lambda", "energy", "linf", "passed", "error"])
    for e in entries:
        if e.result is None:
            writer.writerow([_fmt(e.rho), "nan", "nan", "nan", "false", e.error])
        else:
            row = e.result.table_row()
            writer.writerow(
                [
                    _fmt(e.rho),
                    _fmt(row["lambda"]),
                    _fmt(row["energy"]),
                    _fmt(row["linf"]),
                    "true" if row["passed"] else "false",
                    "",
                ]
            )
    return out.getvalue()
