"""
Value types for the bounded transform Z_T = T C_T^(1/2), C_T = (I + T*T)^-1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from core.checks import CheckReport
from qmatrix.models import HermitianEigen, QMatrix
from qmatrix.serializers import dump_matrix
from spectral_core.models import SpectralMeasure


@dataclass(frozen=True)
class TransformPair:
    """
    T with C = (I + T*T)^-1, Zroot = C^(1/2) and Z = T Zroot.

    `gram` is the eigendecomposition of I + T*T both C and Zroot were built from.
    """

    T: QMatrix
    C: QMatrix
    Zroot: QMatrix
    Z: QMatrix
    gram: HermitianEigen | None = field(default=None, compare=False)

    def as_dict(self) -> dict[str, Any]:
        return {
            "T": dump_matrix(self.T),
            "C": dump_matrix(self.C),
            "Zroot": dump_matrix(self.Zroot),
            "Z": dump_matrix(self.Z),
        }


@dataclass(frozen=True)
class Recovery:
    """T rebuilt from the spectral measure F of Z_T and its pushforward E = F o phi^-1."""

    T: QMatrix
    measure_Z: SpectralMeasure
    measure_T: SpectralMeasure
    gaps: tuple[float, ...]
    checks: CheckReport

    @property
    def min_gap(self) -> float:
        """Smallest 1 - |p|^2 over the live atoms of Z_T."""
        live = [self.gaps[k] for k in self.measure_Z.live_atoms]
        return min(live) if live else 1.0

    def as_dict(self) -> dict[str, Any]:
        return {
            "T": dump_matrix(self.T),
            "measure": self.measure_T.as_dict(),
            "min_gap_1_minus_p2": self.min_gap,
            "checks": self.checks.as_dict(),
        }
