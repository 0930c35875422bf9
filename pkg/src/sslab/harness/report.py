"""Check records and their serialization.

The structured report is one JSON object per line with a fixed key order and
floats written with 17 significant digits, so identical runs give identical
bytes.  Wall-clock runtimes go to a separate timings file for the same reason.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ..io import fmt_float, write_csv
from ..qdyn import wrap_phase
from .tolerances import SCALED_RULES

RECORD_KEYS = ("check_id", "anchor", "rule", "measured", "expected", "tolerance", "passed", "note")
CSV_KEYS = RECORD_KEYS


class ReportError(ValueError):
    """Empty or malformed report."""


@dataclass
class CheckRecord:
    check_id: str
    anchor: str
    rule: str
    measured: Any
    expected: Any
    tolerance: float
    passed: bool | None
    note: str = ""
    runtime: float = 0.0

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in RECORD_KEYS}


def _plain(x):
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_plain(v) for v in x]
    return x


def evaluate(check_id: str, anchor: str, measured, expected, rule: str, tol: float,
             scale: float = 1.0, note: str = "") -> CheckRecord:
    """Apply a rule; see the tolerances module for their definitions."""
    measured, expected = _plain(measured), _plain(expected)
    eff = tol * scale if rule in SCALED_RULES else tol
    if rule == "skip":
        return CheckRecord(check_id, anchor, rule, measured, expected, eff, None, note)
    try:
        if rule == "abs":
            passed = abs(measured - expected) <= eff
        elif rule == "phase":
            passed = abs(float(wrap_phase(measured - expected))) <= eff
        elif rule == "eq":
            passed = measured == expected
        elif rule == "ge":
            passed = measured >= expected
        elif rule == "floor":
            passed = measured <= max(expected, eff)
        else:
            raise ValueError(f"unknown rule {rule!r}")
    except TypeError:
        passed = False
    if isinstance(measured, float) and not math.isfinite(measured):
        passed = False
    return CheckRecord(check_id, anchor, rule, measured, expected, eff, bool(passed), note)


# -- serialization ---------------------------------------------------------

def _encode(x) -> str:
    if x is None or isinstance(x, (bool, str)):
        return json.dumps(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        text = fmt_float(x)
        # keep floats distinguishable from integers after parsing
        return text if any(c in text for c in ".e") else text + ".0"
    if isinstance(x, list):
        return "[" + ", ".join(_encode(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in x.items()) + "}"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def encode_line(obj: dict) -> str:
    return _encode({k: _plain(v) for k, v in obj.items()})


def format_report(header: dict, records: Sequence[CheckRecord]) -> str:
    if not records:
        raise ReportError("refusing to emit an empty report")
    lines = [encode_line({"kind": "header", **header})]
    lines += [encode_line({"kind": "check", **r.to_dict()}) for r in records]
    return "\n".join(lines) + "\n"


def emit_report(records: Sequence[CheckRecord], path, format: str = "structured",
                header: dict | None = None) -> Path:
    """Write records as structured lines or as CSV with one header row."""
    if not records:
        raise ReportError("refusing to emit an empty report")
    path = Path(path)
    if format == "structured":
        path.write_text(format_report(header or {}, records))
    elif format == "csv":
        rows = [[_encode(_plain(getattr(r, k))) if not isinstance(getattr(r, k), str) else getattr(r, k)
                 for k in CSV_KEYS] for r in records]
        write_csv(path, CSV_KEYS, rows)
    else:
        raise ValueError("format must be 'structured' or 'csv'")
    return path


def parse_report(text: str) -> tuple[dict, list[CheckRecord]]:
    header, records = {}, []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        kind = obj.pop("kind", None)
        if kind == "header":
            header = obj
        elif kind == "check":
            records.append(CheckRecord(**obj))
        else:
            raise ReportError(f"unknown line kind {kind!r}")
    return header, records


def read_report(path) -> tuple[dict, list[CheckRecord]]:
    return parse_report(Path(path).read_text())


def write_timings(records: Sequence[CheckRecord], path, total: float) -> None:
    obj = {"total_seconds": round(total, 3),
           "checks": {r.check_id: round(r.runtime, 3) for r in records}}
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")
