from __future__ import annotations

from dataclasses import dataclass

from django.conf import settings


@dataclass(frozen=True)
class Tolerance:
    """Absolute-plus-relative comparison: |a - b| <= atol + rtol * scale."""

    atol: float = 1e-12
    rtol: float = 1e-10

    def __post_init__(self):
        if self.atol <= 0 or self.rtol <= 0:
            raise ValueError("Tolerances must be positive.")

    @classmethod
    def from_settings(cls) -> Tolerance:
        return cls(
            atol=float(getattr(settings, "QSPEC_ATOL", 1e-12)),
            rtol=float(getattr(settings, "QSPEC_RTOL", 1e-10)),
        )

    def threshold(self, scale: float = 1.0) -> float:
        return self.atol + self.rtol * abs(scale)

    def close(self, a: float, b: float, scale: float | None = None) -> bool:
        if scale is None:
            scale = max(abs(a), abs(b))
        return abs(a - b) <= self.threshold(scale)


def resolve(tol: Tolerance | None) -> Tolerance:
    return tol if tol is not None else Tolerance.from_settings()


def grouping_tolerance(norm: float) -> float:
    """Sphere clustering width g = factor * max(1, ||T||)."""
    factor = float(getattr(settings, "QSPEC_GROUPING_RTOL", 1e-8))
    return factor * max(1.0, norm)
