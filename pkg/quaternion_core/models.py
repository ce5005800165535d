"""
Scalar value types. Nothing here is persisted; the app has no database tables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Real

import numpy as np

from core.exceptions import QuaternionDomainError

from .array_utils import qmul
from .constants import UNIT_TOLERANCE


@dataclass(frozen=True, eq=False)
class Quaternion:
    """s0 + s1 e1 + s2 e2 + s3 e3 with e1e2 = e3, e2e3 = e1, e3e1 = e2."""

    s0: float = 0.0
    s1: float = 0.0
    s2: float = 0.0
    s3: float = 0.0

    @classmethod
    def from_array(cls, values) -> Quaternion:
        s0, s1, s2, s3 = (float(x) for x in values)
        return Quaternion(s0, s1, s2, s3)

    @classmethod
    def real(cls, x: float) -> Quaternion:
        return Quaternion(float(x))

    def as_array(self) -> np.ndarray:
        return np.array([self.s0, self.s1, self.s2, self.s3])

    def as_list(self) -> list[float]:
        return [self.s0, self.s1, self.s2, self.s3]

    @property
    def re(self) -> float:
        return self.s0

    @property
    def im(self) -> Quaternion:
        return Quaternion(0.0, self.s1, self.s2, self.s3)

    @property
    def abs_im(self) -> float:
        return math.sqrt(self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3)

    def norm(self) -> float:
        return math.sqrt(self.s0 * self.s0 + self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3)

    def conj(self) -> Quaternion:
        return Quaternion(self.s0, -self.s1, -self.s2, -self.s3)

    def inverse(self) -> Quaternion:
        n2 = self.s0 * self.s0 + self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3
        if n2 == 0.0:
            raise QuaternionDomainError("Zero quaternion has no inverse.")
        return Quaternion(self.s0 / n2, -self.s1 / n2, -self.s2 / n2, -self.s3 / n2)

    def is_real(self, atol: float = 0.0) -> bool:
        return self.abs_im <= atol

    def _coerce(self, other) -> Quaternion | None:
        if isinstance(other, Quaternion):
            return other
        if isinstance(other, Real):
            return Quaternion(float(other))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quaternion(self.s0 + o.s0, self.s1 + o.s1, self.s2 + o.s2, self.s3 + o.s3)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Quaternion(self.s0 - o.s0, self.s1 - o.s1, self.s2 - o.s2, self.s3 - o.s3)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return Quaternion(-self.s0, -self.s1, -self.s2, -self.s3)

    def __mul__(self, other):
        if isinstance(other, Real):
            x = float(other)
            return Quaternion(self.s0 * x, self.s1 * x, self.s2 * x, self.s3 * x)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion.from_array(qmul(self.as_array(), other.as_array()))

    def __rmul__(self, other):
        # only reached for real left factors, which commute
        if isinstance(other, Real):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Real):
            if other == 0:
                raise QuaternionDomainError("Division by zero.")
            return self * (1.0 / float(other))
        return NotImplemented

    def __abs__(self) -> float:
        return self.norm()

    def __eq__(self, other):
        if isinstance(other, Real):
            other = Quaternion(float(other))
        if not isinstance(other, Quaternion):
            return NotImplemented
        return self.as_list() == other.as_list()

    def __hash__(self):
        return hash(tuple(self.as_list()))

    def __str__(self) -> str:
        return f"{self.s0:g}{self.s1:+g}e1{self.s2:+g}e2{self.s3:+g}e3"


@dataclass(frozen=True, eq=False)
class ImaginaryUnit(Quaternion):
    """A point of the unit sphere of purely imaginary quaternions; squares to -1."""

    def __post_init__(self):
        if abs(self.s0) > UNIT_TOLERANCE or abs(self.norm() - 1.0) > UNIT_TOLERANCE:
            raise QuaternionDomainError(f"{self} is not a unit imaginary quaternion.")

    @classmethod
    def from_vector(cls, x: float, y: float, z: float) -> ImaginaryUnit:
        r = math.sqrt(x * x + y * y + z * z)
        if r == 0.0:
            raise QuaternionDomainError("Zero vector does not define an imaginary unit.")
        return cls(0.0, x / r, y / r, z / r)

    @property
    def axis(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3])


@dataclass(frozen=True)
class SlicePoint:
    """u + j v in the closed upper half-plane C_j^+ (v >= 0)."""

    u: float
    v: float
    j: ImaginaryUnit

    def __post_init__(self):
        if self.v < 0:
            raise QuaternionDomainError(f"Slice point needs v >= 0, got {self.v}.")

    def to_quaternion(self) -> Quaternion:
        return Quaternion(self.u) + self.j * self.v

    def as_complex(self) -> complex:
        return complex(self.u, self.v)
