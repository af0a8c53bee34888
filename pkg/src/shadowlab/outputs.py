"""Deterministic CSV/JSON writers."""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np


def clean(obj):
    """Plain JSON-safe data: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer, np.bool_)):
        return str(v.item())
    return v


def write_csv(path, header, rows):
    """RFC 4180 CSV (CRLF line ends, minimal quoting, shortest round-trip floats)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return os.path.basename(path)


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clean(obj), fh, sort_keys=True, indent=2, ensure_ascii=False,
                  allow_nan=False)
        fh.write("\n")
    return os.path.basename(path)


def write_orbit_csv(path, orbit):
    """Columns: index, x, dlog."""
    rows = zip(range(orbit.points.size), orbit.points, orbit.dlog)
    return write_csv(path, ["index", "x", "dlog"], rows)
