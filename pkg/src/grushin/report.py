"""Flat report records, deterministic JSON/CSV output and seed derivation."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from typing import Iterable, Optional

import numpy as np


def derive_seed(seed: int, task: str) -> int:
    """Stable 64-bit seed for one task of a run."""
    h = hashlib.sha256(f"{int(seed)}:{task}".encode()).digest()
    return int.from_bytes(h[:8], "little")


def _clean(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if v is None or isinstance(v, str):
        return v
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_csv_cell(_clean(x)) for x in v)
    return str(v)


def flatten(record: dict) -> dict:
    """Scalar-only copy: sequences become ';'-joined strings, non-finite floats None."""
    return {str(k): _clean(v) for k, v in record.items()}


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def header(records) -> list:
    keys = []
    for r in records:
        for k in r:
            if k not in keys:
                keys.append(k)
    return keys


def render(records: Iterable[dict], fmt: str = "json") -> str:
    records = [flatten(r) for r in records]
    if fmt == "json":
        # json uses repr() for floats: 17 significant digits round-trip
        return json.dumps(records, indent=1, allow_nan=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        keys = header(records)
        w.writerow(keys)
        for r in records:
            w.writerow([_csv_cell(r.get(k)) for k in keys])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(records, fmt: str = "json", path: Optional[str] = None) -> str:
    text = render(records, fmt)
    if path is not None and path != "-":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
