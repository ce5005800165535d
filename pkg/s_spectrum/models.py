from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from qmatrix.models import QMatrix
from qmatrix.serializers import dump_matrix
from quaternion_core.models import ImaginaryUnit, Quaternion


@dataclass(frozen=True)
class EigenSphere:
    """
    One sphere {u + i v : i imaginary unit} of the S-spectrum, stored through its point
    rep = u + j v of C_j^+.

    For normal T the sphere also carries its orthogonal projection and the right
    eigenvectors y with T y = y rep that span its range.
    """

    rep: Quaternion
    multiplicity: int
    projection: QMatrix | None = None
    vectors: tuple[np.ndarray, ...] = field(default=(), compare=False)

    @property
    def u(self) -> float:
        return self.rep.re

    @property
    def v(self) -> float:
        return self.rep.abs_im

    def as_dict(self, include_projection: bool = True) -> dict[str, Any]:
        out: dict[str, Any] = {"rep": self.rep.as_list(), "multiplicity": self.multiplicity}
        if include_projection and self.projection is not None:
            out["projection"] = dump_matrix(self.projection)
        return out


@dataclass(frozen=True)
class SSpectrum:
    spheres: tuple[EigenSphere, ...]
    j: ImaginaryUnit
    n: int
    normal: bool

    @property
    def reps(self) -> list[Quaternion]:
        return [s.rep for s in self.spheres]

    @property
    def total_multiplicity(self) -> int:
        return sum(s.multiplicity for s in self.spheres)

    def projection_sum(self) -> QMatrix:
        total = np.zeros((self.n, self.n, 4))
        for sphere in self.spheres:
            if sphere.projection is not None:
                total = total + sphere.projection.data
        return QMatrix(total)

    def csv_rows(self) -> list[tuple[float, float, int]]:
        return [(s.u, s.v, s.multiplicity) for s in self.spheres]

    def as_dict(self) -> dict[str, Any]:
        return {
            "j": self.j.as_list(),
            "n": self.n,
            "normal": self.normal,
            "spheres": [s.as_dict() for s in self.spheres],
        }


@dataclass(frozen=True)
class ResidualReport:
    lhs_norm: float
    rhs_norm: float
    residual: float

    def as_dict(self) -> dict[str, float]:
        return {"lhs_norm": self.lhs_norm, "rhs_norm": self.rhs_norm, "residual": self.residual}
