"""Structured run reports: JSON documents with fixed-precision numbers, plus a TSV view."""

from __future__ import annotations

import json
import math

import numpy as np

SIG_DIGITS = 12


def _round(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value in report: {x}")
    if x == 0.0:
        return 0.0  # drop the sign of -0.0
    return float(f"{x:.{SIG_DIGITS}g}")


def clean(obj):
    """Recursively convert numpy values to plain Python and round floats to 12 significant digits."""
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
        return _round(obj)
    return obj


def render_json(report: dict) -> str:
    return json.dumps(clean(report), indent=2)


def _scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def render_tsv(report: dict) -> str:
    """Flatten the result payload into tab-separated lines.

    Scalars become ``key<TAB>value``; numeric vectors become one
    ``key<TAB>index<TAB>value`` line per entry; lists of records get a header row.
    """
    payload = clean(report.get("result", {}))
    lines = [f"command\t{report.get('command', '')}"]

    def emit(prefix, value):
        if isinstance(value, dict):
            for k, v in value.items():
                emit(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(value, list) and value and all(isinstance(r, dict) for r in value):
            keys = list(value[0])
            lines.append("\t".join([prefix, "#"] + keys))
            for idx, row in enumerate(value):
                cells = [json.dumps(row[k]) if isinstance(row.get(k), (list, dict)) else _scalar(row.get(k)) for k in keys]
                lines.append("\t".join([prefix, str(idx)] + cells))
        elif isinstance(value, list):
            for idx, v in enumerate(value):
                cell = json.dumps(v) if isinstance(v, (list, dict)) else _scalar(v)
                lines.append(f"{prefix}\t{idx}\t{cell}")
        else:
            lines.append(f"{prefix}\t{_scalar(value)}")

    emit("", payload)
    return "\n".join(lines)
