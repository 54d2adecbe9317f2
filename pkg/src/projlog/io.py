"""Measure files and table writers.

Measure file (JSON object, unknown keys rejected)::

    {
      "kind":    "atomic" | "cloud" | "family",
      "space":   "affine" | "projective" | "real",     (default "affine")
      "points":  [[x_1, ..., x_d], ...],               (atomic, cloud)
      "weights": [w_1, ...],                           (atomic only)
      "family":  {FamilySpec fields except seed},      (family only)
      "seed":    int                                   (family only, default 0)
    }

For "affine" (points of C^n) and "projective" (homogeneous vectors in
C^{n+1}) each point lists interleaved real and imaginary parts
[re_1, im_1, re_2, im_2, ...]; for "real" the coordinates are plain reals.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from dataclasses import fields as dc_fields

import numpy as np

from .geometry import normalize_homog, real_to_complex
from .measures import FamilySpec, Measure, MeasureError, cloud, make_atomic, sample_family

SCHEMA_VERSION = 1
MEASURE_KEYS = {"kind", "space", "points", "weights", "family", "seed"}
SPACES = ("affine", "projective", "real")


def _points(raw, space: str) -> np.ndarray:
    try:
        pts = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MeasureError(f"points must be a list of numeric lists ({exc})") from None
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise MeasureError("points must be a nonempty list of coordinate lists")
    if space == "real":
        return pts
    if pts.shape[1] % 2:
        raise MeasureError(f"{space} points need interleaved re/im pairs, got {pts.shape[1]} numbers")
    Z = real_to_complex(pts)
    if space == "projective":
        if Z.shape[1] < 2:
            raise MeasureError("projective points need at least two homogeneous coordinates")
        if np.any(np.abs(Z).max(axis=1) == 0):
            raise MeasureError("projective points must be nonzero")
        Z = normalize_homog(Z)
    return Z


def measure_from_dict(d: dict) -> tuple[Measure, str]:
    """Build a measure from a parsed measure file; returns (measure, space)."""
    if not isinstance(d, dict):
        raise MeasureError("measure file must hold a JSON object")
    unknown = set(d) - MEASURE_KEYS
    if unknown:
        raise MeasureError(f"unknown measure field(s): {', '.join(sorted(unknown))}")
    kind = d.get("kind")
    space = d.get("space", "affine")
    if space not in SPACES:
        raise MeasureError(f"space must be one of {SPACES}")
    if kind == "family":
        if "points" in d or "weights" in d:
            raise MeasureError("family measures take no points or weights")
        fam = d.get("family")
        if not isinstance(fam, dict):
            raise MeasureError("family measures need a 'family' object")
        allowed = {f.name for f in dc_fields(FamilySpec)} - {"seed"}
        bad = set(fam) - allowed
        if bad:
            raise MeasureError(f"unknown family field(s): {', '.join(sorted(bad))}")
        try:
            spec = FamilySpec(**fam, seed=int(d.get("seed", 0)))
        except TypeError as exc:
            raise MeasureError(str(exc)) from None
        mu = sample_family(spec)
        if spec.family == "uniform_Pn":
            space = "projective"
        return mu, space
    if kind not in ("atomic", "cloud"):
        raise MeasureError("kind must be 'atomic', 'cloud' or 'family'")
    if "family" in d or "seed" in d:
        raise MeasureError("'family' and 'seed' apply only to kind 'family'")
    if "points" not in d:
        raise MeasureError("missing 'points'")
    pts = _points(d["points"], space)
    if kind == "cloud":
        if "weights" in d:
            raise MeasureError("cloud measures have uniform weights")
        return cloud(pts), space
    if "weights" not in d:
        raise MeasureError("atomic measures need 'weights'")
    return make_atomic(pts, d["weights"]), space


def load_measure(path: str) -> tuple[Measure, str]:
    with open(path, encoding="utf-8") as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MeasureError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return measure_from_dict(d)


def measure_to_dict(mu: Measure, space: str = "affine") -> dict:
    pts = mu.points
    if space != "real":
        pts = np.stack([pts.real, pts.imag], axis=-1).reshape(pts.shape[0], -1)
    d = {"kind": mu.kind, "space": space, "points": pts.tolist()}
    if mu.kind == "atomic":
        d["weights"] = mu.weights.tolist()
    return d


def fmt(x) -> str:
    """Stable text form of a number: repr for finite floats, inf/-inf/nan otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else fmt(x)
    return x


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(obj) -> str:
    """JSON with non-finite numbers written as the strings "inf", "-inf", "nan"."""
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def table_text(header, rows, fmt_name: str, meta: dict | None = None) -> str:
    """Render a table as CSV, or as JSON {"schema": .., **meta, "columns": .., "rows": ..}."""
    if fmt_name == "csv":
        return csv_text(header, rows)
    obj = {"schema": SCHEMA_VERSION}
    obj.update(meta or {})
    obj["columns"] = list(header)
    obj["rows"] = [list(r) for r in rows]
    return json_text(obj)


def write_text(path: str | None, text: str, stream=None) -> None:
    if path is None or path == "-":
        (stream or sys.stdout).write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
