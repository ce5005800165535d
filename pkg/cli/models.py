"""
Run configuration and pipeline results for the management commands. Nothing is persisted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from core.tolerances import Tolerance
from quaternion_core.models import ImaginaryUnit

COMMANDS = ("spectrum", "decompose", "measure", "apply", "transform", "verify")
FORMATS = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: Path | None
    j: ImaginaryUnit
    tol: Tolerance
    seed: int
    output: Path | None = None
    format: str = "json"
    fn: str = "id"

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "j": self.j.as_list(),
            "atol": self.tol.atol,
            "rtol": self.tol.rtol,
            "seed": self.seed,
        }


@dataclass
class PipelineResult:
    """Report payload, optional CSV rows (re, abs_im, multiplicity) and the verification outcome."""

    payload: dict[str, Any]
    rows: list[tuple[float, float, int]] | None = None
    passed: bool = True
    failures: list[str] = field(default_factory=list)
