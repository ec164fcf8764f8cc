"""CSV/JSON serialization shared by bound curves, TV curves and the CLI."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math

import numpy as np

SIG_DIGITS = 12


def _plain(obj):
    """Convert numpy scalars/arrays and sets to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def params_hash(params: dict) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON of ``params``."""
    blob = json.dumps(_plain(params), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def fmt(value) -> str:
    """12 significant digits; empty string for missing values."""
    if value is None:
        return ""
    v = float(value)
    if math.isnan(v):
        return ""
    return f"{v:.{SIG_DIGITS}g}"


def csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def json_envelope(kind: str, params: dict, columns: dict, seed: int | None = None, **extra) -> str:
    """Self-describing JSON document: parameters, their hash, seed and column data."""
    doc = {
        "kind": kind,
        "params": _plain(params),
        "params_hash": params_hash(params),
        "seed": seed,
        "columns": {k: [None if (v is None or (isinstance(v, float) and math.isnan(v)))
                        else float(fmt(v)) for v in vals]
                    for k, vals in columns.items()},
    }
    doc.update(_plain(extra))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
