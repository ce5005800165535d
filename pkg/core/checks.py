"""
Residual reports returned by every verification operation.

Verification never raises on a failed property; it records a Check and keeps going.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    threshold: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict[str, Any]:
        out = {
            "name": self.name,
            "residual": float(self.residual),
            "threshold": float(self.threshold),
            "passed": bool(self.passed),
        }
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class CheckReport:
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def residual_below(self, name: str, residual: float, threshold: float, detail: str = "") -> Check:
        """Record `residual <= threshold` under `name`."""
        residual = float(residual)
        check = Check(name, residual, float(threshold), bool(residual <= threshold), detail)
        self.checks.append(check)
        if not check.passed:
            logger.debug("%s: %s failed (%.3e > %.3e)", self.title, name, residual, threshold)
        return check

    def flag(self, name: str, ok: bool, detail: str = "") -> Check:
        check = Check(name, 0.0 if ok else 1.0, 0.0, bool(ok), detail)
        self.checks.append(check)
        return check

    def extend(self, other: CheckReport, prefix: str | None = None) -> None:
        prefix = other.title if prefix is None else prefix
        for c in other.checks:
            name = f"{prefix}.{c.name}" if prefix else c.name
            self.checks.append(Check(name, c.residual, c.threshold, c.passed, c.detail))

    def worst(self, name: str) -> float:
        values = [c.residual for c in self.checks if c.name == name]
        return max(values) if values else 0.0

    def as_dict(self) -> dict[str, Any]:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }
