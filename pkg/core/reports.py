"""
Report writers: canonical JSON and plot-ready CSV.

Canonical JSON has sorted keys, two-space indentation and every float printed with
QSPEC_FLOAT_FORMAT, so identical inputs give byte-identical files.
"""
import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, List

import numpy as np
from django.conf import settings


def _float_format() -> str:
    return getattr(settings, "QSPEC_FLOAT_FORMAT", "%.17g")


def _encode_float(value: float, fmt: str) -> str:
    if not math.isfinite(value):
        # JSON has no inf/nan; keep them readable and parseable as strings
        return json.dumps("inf" if value > 0 else "-inf" if value < 0 else "nan")
    if value == 0.0:
        value = 0.0  # drop the sign of -0.0
    return fmt % value


def _encode(obj: Any, fmt: str, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _encode_float(float(obj), fmt)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist(), fmt, indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k))}: {_encode(obj[k], fmt, indent, level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # Numeric leaves (quaternion4 and friends) stay on one line
        if all(isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_encode(x, fmt, indent, level) for x in obj) + "]"
        items = [f"{pad}{_encode(x, fmt, indent, level + 1)}" for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"Cannot encode {type(obj).__name__} in a report")


def canonical_json(obj: Any, indent: int = 2) -> str:
    return _encode(obj, _float_format(), indent, 0) + "\n"


def write_json(obj: Any, path: str | Path | None = None) -> str:
    """Encode `obj`; write it to `path` when given. Returns the text either way."""
    text = canonical_json(obj)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def spectrum_rows_to_csv(rows: Iterable[tuple], headers: List[str] | None = None) -> str:
    """
    Plot-ready CSV of spheres/atoms.

    Args:
        rows: (re, abs_im, multiplicity) tuples
        headers: header row (defaults to re,abs_im,multiplicity)
    """
    fmt = _float_format()
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers or ["re", "abs_im", "multiplicity"])
    for re_part, abs_im, multiplicity in rows:
        writer.writerow([_encode_float(float(re_part), fmt), _encode_float(float(abs_im), fmt), int(multiplicity)])
    return buffer.getvalue()


def write_text(text: str, path: str | Path | None = None) -> str:
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
