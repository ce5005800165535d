from __future__ import annotations

from pathlib import Path
from typing import Any

from django.conf import settings
from rest_framework import serializers

from core.exceptions import ConfigurationError, QuaternionDomainError
from core.tolerances import Tolerance
from qmatrix.serializers import flatten_errors
from quaternion_core.services import parse_unit

from .models import COMMANDS, FORMATS, RunConfig


class RunConfigSerializer(serializers.Serializer):
    command = serializers.ChoiceField(choices=COMMANDS)
    input = serializers.CharField(required=False, allow_null=True, allow_blank=False)
    output = serializers.CharField(required=False, allow_null=True, allow_blank=False)
    j = serializers.CharField(required=False, allow_null=True)
    atol = serializers.FloatField(required=False, allow_null=True)
    rtol = serializers.FloatField(required=False, allow_null=True)
    seed = serializers.IntegerField(required=False, allow_null=True, min_value=0)
    format = serializers.ChoiceField(choices=FORMATS, required=False, default="json")
    fn = serializers.CharField(required=False, allow_null=True, default="id")

    def validate_j(self, value):
        text = value or getattr(settings, "QSPEC_DEFAULT_J", "e1")
        try:
            return parse_unit(text, strict=True)
        except QuaternionDomainError as exc:
            raise serializers.ValidationError(str(exc)) from exc

    def _positive(self, value, name: str, default: float) -> float:
        value = default if value is None else value
        if not value > 0.0:
            raise serializers.ValidationError(f"{name} must be positive.")
        return value

    def validate_atol(self, value):
        return self._positive(value, "atol", float(getattr(settings, "QSPEC_ATOL", 1e-12)))

    def validate_rtol(self, value):
        return self._positive(value, "rtol", float(getattr(settings, "QSPEC_RTOL", 1e-10)))

    def validate(self, attrs):
        if attrs["command"] != "verify" and not attrs.get("input"):
            raise serializers.ValidationError({"input": [f"{attrs['command']} needs --input."]})
        return attrs


def build_run_config(command: str, options: dict[str, Any]) -> RunConfig:
    """Validate command options into a RunConfig; unset values fall back to settings."""
    data = {key: options.get(key) for key in ("input", "output", "j", "atol", "rtol", "seed", "fn")}
    data["command"] = command
    data["format"] = options.get("format") or "json"
    data["j"] = data["j"] or getattr(settings, "QSPEC_DEFAULT_J", "e1")
    data = {key: value for key, value in data.items() if value is not None}
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigurationError(f"Invalid options: {flatten_errors(serializer.errors)}")
    values = serializer.validated_data
    seed = values.get("seed")
    return RunConfig(
        command=command,
        input=Path(values["input"]) if values.get("input") else None,
        j=values["j"],
        tol=Tolerance(
            atol=values.get("atol", float(getattr(settings, "QSPEC_ATOL", 1e-12))),
            rtol=values.get("rtol", float(getattr(settings, "QSPEC_RTOL", 1e-10))),
        ),
        seed=int(getattr(settings, "QSPEC_SEED", 42)) if seed is None else seed,
        output=Path(values["output"]) if values.get("output") else None,
        format=values.get("format", "json"),
        fn=values.get("fn") or "id",
    )
