"""
Matrix file format:

    {"n": <int >= 1>, "entries": [[[s0, s1, s2, s3], ...], ...]}

entries is row-major with exactly n rows of n quaternions; every component is a finite
JSON number. Ragged rows, non-square data and strings are rejected.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from rest_framework import serializers

from core.exceptions import MatrixFormatError

from .models import QMatrix


class StrictFloatField(serializers.FloatField):
    """Only JSON numbers; no numeric strings, booleans, nan or infinity."""

    default_error_messages = {
        "not_number": "A JSON number is required.",
        "not_finite": "Components must be finite.",
    }

    def to_internal_value(self, data):
        if isinstance(data, bool) or not isinstance(data, (int, float)):
            self.fail("not_number")
        value = float(data)
        if not math.isfinite(value):
            self.fail("not_finite")
        return value


class QuaternionField(serializers.ListField):
    def __init__(self, **kwargs):
        super().__init__(child=StrictFloatField(), min_length=4, max_length=4, **kwargs)


class MatrixSerializer(serializers.Serializer):
    n = serializers.IntegerField(min_value=1)
    entries = serializers.ListField(
        child=serializers.ListField(child=QuaternionField(), allow_empty=False),
        allow_empty=False,
    )

    def validate_n(self, value):
        if isinstance(self.initial_data.get("n"), bool):
            raise serializers.ValidationError("n must be an integer.")
        return value

    def validate(self, attrs):
        n = attrs["n"]
        rows = attrs["entries"]
        if len(rows) != n:
            raise serializers.ValidationError({"entries": [f"Expected {n} rows, got {len(rows)}."]})
        for i, row in enumerate(rows):
            if len(row) != n:
                raise serializers.ValidationError(
                    {"entries": [f"Row {i} has {len(row)} entries, expected {n}."]}
                )
        return attrs


def flatten_errors(errors: Any) -> str:
    if isinstance(errors, dict):
        return "; ".join(f"{key}: {flatten_errors(value)}" for key, value in errors.items())
    if isinstance(errors, list):
        return "; ".join(flatten_errors(e) for e in errors if e)
    return str(errors)


def parse_matrix(payload: Any) -> QMatrix:
    if not isinstance(payload, dict):
        raise MatrixFormatError("Matrix file must hold a JSON object with keys n and entries.")
    serializer = MatrixSerializer(data=payload)
    if not serializer.is_valid():
        raise MatrixFormatError(f"Invalid matrix: {flatten_errors(serializer.errors)}")
    return QMatrix(serializer.validated_data["entries"])


def load_matrix(source: str | Path | dict) -> QMatrix:
    """Read a matrix from a path, a JSON string, or an already-decoded dict."""
    if isinstance(source, dict):
        return parse_matrix(source)
    text = str(source)
    if isinstance(source, Path) or not text.lstrip().startswith("{"):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise MatrixFormatError(f"Cannot read matrix file {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"Malformed JSON: {exc}") from exc
    return parse_matrix(payload)


def dump_matrix(a: QMatrix) -> dict[str, Any]:
    return {"n": a.n, "entries": a.data.tolist()}
