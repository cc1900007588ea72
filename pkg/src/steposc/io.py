"""File formats: spectrum CSV, flat float64 fields with a JSON sidecar, generic CSV tables.

Floats are written with ``repr`` so a round trip is exact and reruns are
byte-identical.
"""
from __future__ import annotations

import csv
import json
import os
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import IngestionError


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])
    return path


def read_csv_columns(path, required: Sequence[str]) -> dict:
    """Read named numeric columns; raise :class:`IngestionError` on any format problem."""
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"{path}: no such file")
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
            fields = rows[0].keys() if rows else []
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    if not rows:
        raise IngestionError(f"{path}: empty table")
    missing = [c for c in required if c not in fields]
    if missing:
        raise IngestionError(f"{path}: missing column(s) {', '.join(missing)}")
    out = {}
    for c in fields:
        try:
            out[c] = np.array([float(r[c]) for r in rows])
        except (TypeError, ValueError):
            if c in required:
                raise IngestionError(f"{path}: non-numeric value in column {c!r}")
    return out


def write_json(path, obj) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def write_json_lines(path, objs: Iterable[dict]) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        for o in objs:
            fh.write(json.dumps(o, sort_keys=True, default=_json_default))
            fh.write("\n")
    return path


def read_json_lines(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


# spectra ---------------------------------------------------------------

def write_spectrum_csv(path, eigenvalues, residuals) -> Path:
    rows = ((i + 1, e, r) for i, (e, r) in enumerate(zip(eigenvalues, residuals)))
    return write_csv(path, ["index", "eigenvalue", "residual"], rows)


def read_spectrum_csv(path) -> np.ndarray:
    """Eigenvalues from any CSV with ``index,eigenvalue`` columns, ordered by index."""
    cols = read_csv_columns(path, ["index", "eigenvalue"])
    order = np.argsort(cols["index"], kind="stable")
    ev = cols["eigenvalue"][order]
    if not np.all(np.isfinite(ev)):
        raise IngestionError(f"{path}: non-finite eigenvalue")
    return ev


# fields ----------------------------------------------------------------

def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def write_array(path, arr: np.ndarray, meta: dict) -> Path:
    """Flat little-endian float64 dump of ``arr`` with a JSON sidecar ``<stem>.json``."""
    path = Path(path)
    arr = np.ascontiguousarray(arr, dtype="<f8")
    tmp = path.with_name(path.name + ".part")
    arr.tofile(tmp)
    os.replace(tmp, path)
    side = dict(meta)
    side.update({"shape": list(arr.shape), "dtype": "<f8", "order": "row-major",
                 "file": path.name})
    write_json(_sidecar(path), side)
    return path


def write_fields(path, fields: np.ndarray, grid_description: dict,
                 extra: Optional[dict] = None) -> Path:
    """Write ``fields`` (``(count, n1, n2)`` or ``(n1, n2)``) as little-endian float64.

    The sidecar ``<stem>.json`` records the grid, shape and ordering.
    """
    arr = np.asarray(fields, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError("fields must be 2-D or 3-D")
    if arr.shape[1:] != (grid_description["n1"], grid_description["n2"]):
        raise ValueError("field shape does not match the grid description")
    meta = dict(grid_description)
    meta.update({"count": int(arr.shape[0]), "layout": "count, n1, n2"})
    if extra:
        meta.update(extra)
    return write_array(path, arr, meta)


def read_fields(path):
    """Return ``(fields, meta)`` with ``fields`` shaped ``(count, n1, n2)``."""
    path = Path(path)
    side = _sidecar(path)
    if not path.is_file() or not side.is_file():
        raise IngestionError(f"{path}: field file or sidecar missing")
    try:
        meta = json.loads(side.read_text())
        shape = (int(meta["count"]), int(meta["n1"]), int(meta["n2"]))
    except (ValueError, KeyError) as exc:
        raise IngestionError(f"{side}: bad sidecar ({exc})") from exc
    data = np.fromfile(path, dtype="<f8")
    if data.size != shape[0] * shape[1] * shape[2]:
        raise IngestionError(f"{path}: {data.size} values, sidecar expects {shape}")
    return data.reshape(shape), meta


def write_field_csv(path, field: np.ndarray, q1, q2) -> Path:
    """Long-format export ``q1,q2,value`` for small grids."""
    Q1, Q2 = np.meshgrid(q1, q2, indexing="ij")
    return write_csv(path, ["q1", "q2", "value"], zip(Q1.ravel(), Q2.ravel(), np.ravel(field)))
