"""Delimited-text and JSON writers shared by the CLI."""
from __future__ import annotations

import csv
import json
import math


def fmt(v) -> str:
    """Full-precision text for a CSV cell; ``None``/NaN become empty fields."""
    if v is None:
        return ""
    if isinstance(v, (bool, int)) and not isinstance(v, float):
        return str(v)
    v = float(v)
    return "" if math.isnan(v) else f"{v:.17g}"


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else fmt(c) for c in row])


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def _default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")
