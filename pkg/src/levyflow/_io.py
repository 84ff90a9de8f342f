"""Shared serialization helpers: schema headers and round-trip float formatting."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

SCHEMA_PREFIX = "# levyflow-schema: "
SCHEMA_VERSION = 1


def fmt(x) -> str:
    """Format a number with 17 significant digits (exact float round-trip)."""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def schema_line(kind: str) -> str:
    return f"{SCHEMA_PREFIX}{kind}/{SCHEMA_VERSION}\n"


def write_csv(path, kind: str, header, rows) -> None:
    buf = io.StringIO()
    buf.write(schema_line(kind))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, int)) and not isinstance(v, bool) else v for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_json(path, kind: str, payload: dict) -> None:
    doc = {"schema": f"{kind}/{SCHEMA_VERSION}", **payload}
    Path(path).write_text(json.dumps(_clean(doc), indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _clean(obj):
    # json has no NaN; missing values become null
    if isinstance(obj, float):
        return None if math.isnan(obj) or math.isinf(obj) else obj
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalar
        return _clean(obj.item())
    return obj


def read_csv_rows(path) -> list[list[str]]:
    """Read a CSV file, skipping ``#`` comment lines (schema headers) and blank lines."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    return [row for row in csv.reader(lines)]
