"""CSV tables and the JSON summary written by the command line."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import HalflineWalkError

SURVIVAL_COLUMNS = ("n", "survivors", "p_hat", "ci99")
RATIO_COLUMNS = ("lambda", "one_minus_lambda", "log_ratio", "i0", "i1", "i4")


def fmt(x) -> str:
    """Plain-text number with 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _write(path: Path, header, rows) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(v) for v in r])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def emit_survival_csv(curve, path) -> Path:
    """Columns ``n, survivors, p_hat, ci99``; ``p_hat`` must be non-increasing."""
    p = list(curve.p_hat) if curve is not None else []
    if any(b > a for a, b in zip(p, p[1:])):
        raise HalflineWalkError("p_hat is not non-increasing; refusing to write")
    rows = [] if curve is None else zip(curve.n_values, curve.survivors, curve.p_hat,
                                        curve.ci_half_width)
    return _write(path, SURVIVAL_COLUMNS, rows)


def ratio_rows(ratio) -> list[tuple]:
    return [(lam, 1.0 - lam, r, i0, i1, i4) for lam, r, i0, i1, i4 in
            zip(ratio.lambdas, ratio.log_ratio, ratio.i0_vals, ratio.i1_vals, ratio.i4_vals)]


def emit_ratio_csv(ratio, path) -> Path:
    """Columns ``lambda, one_minus_lambda, log_ratio, i0, i1, i4``."""
    return _write(path, RATIO_COLUMNS, ratio_rows(ratio) if ratio is not None else [])


def slope_from_columns(one_minus_lambda, log_ratio) -> float:
    """Least-squares slope of ``log_ratio`` against ``log(1 - lambda)``."""
    x = np.log(np.asarray(one_minus_lambda, dtype=float))
    y = np.asarray(log_ratio, dtype=float)
    if x.size < 2:
        return math.nan
    return float(np.polyfit(x, y, 1)[0])


def written_slope(ratio) -> float:
    """The slope as recomputed from the values exactly as written to CSV."""
    rows = ratio_rows(ratio)
    return slope_from_columns([float(fmt(r[1])) for r in rows], [float(fmt(r[2])) for r in rows])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_summary(summary: dict, path) -> Path:
    """Deterministic JSON (sorted keys, no timestamps)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
