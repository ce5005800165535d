from __future__ import annotations

import cmath
import logging
import math

import numpy as np
from django.conf import settings

from core.exceptions import QuaternionDomainError

from .constants import UNIT_TOLERANCE, UNIT_VECTORS
from .models import ImaginaryUnit, Quaternion, SlicePoint

logger = logging.getLogger(__name__)


def mul(a: Quaternion, b: Quaternion) -> Quaternion:
    return a * b


def conj(a: Quaternion) -> Quaternion:
    return a.conj()


def norm(a: Quaternion) -> float:
    return a.norm()


def inverse(a: Quaternion) -> Quaternion:
    """a^-1 = conj(a) / |a|^2; raises QuaternionDomainError at zero."""
    return a.inverse()


def parse_unit(text: str | ImaginaryUnit, strict: bool = False) -> ImaginaryUnit:
    """
    Read an imaginary unit from "e1" | "e2" | "e3" | "x,y,z".

    The "x,y,z" form is normalized unless strict is set, in which case it must already
    have unit length within 1e-12.
    """
    if isinstance(text, ImaginaryUnit):
        return text
    key = str(text).strip().lower()
    if key in UNIT_VECTORS:
        return ImaginaryUnit(*UNIT_VECTORS[key])
    parts = [p for p in key.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise QuaternionDomainError(f"Cannot read imaginary unit from {text!r}; use e1, e2, e3 or x,y,z.")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError as exc:
        raise QuaternionDomainError(f"Cannot read imaginary unit from {text!r}.") from exc
    if not all(math.isfinite(c) for c in (x, y, z)):
        raise QuaternionDomainError(f"Imaginary unit {text!r} has non-finite components.")
    r = math.sqrt(x * x + y * y + z * z)
    if r == 0.0:
        raise QuaternionDomainError("Zero vector does not define an imaginary unit.")
    if strict and abs(r - 1.0) > UNIT_TOLERANCE:
        raise QuaternionDomainError(f"Imaginary unit {text!r} has length {r!r}, expected 1.")
    return ImaginaryUnit.from_vector(x, y, z)


def default_unit() -> ImaginaryUnit:
    return parse_unit(getattr(settings, "QSPEC_DEFAULT_J", "e1"))


def slice_split(q: Quaternion, default_j: ImaginaryUnit | None = None) -> SlicePoint:
    """
    Write q = u + i v with v >= 0 and i in the imaginary sphere.

    Real q has no preferred unit; it gets default_j (settings.QSPEC_DEFAULT_J when omitted).
    """
    v = q.abs_im
    if v == 0.0:
        return SlicePoint(q.s0, 0.0, default_j or default_unit())
    unit = ImaginaryUnit.from_vector(q.s1, q.s2, q.s3)
    return SlicePoint(q.s0, v, unit)


def sphere_representative(q: Quaternion, j: ImaginaryUnit | None = None) -> Quaternion:
    """The point u + j v of C_j^+ lying on the sphere of q."""
    j = j or default_unit()
    return Quaternion(q.s0) + j * q.abs_im


def slice_to_quaternion(z: complex, j: ImaginaryUnit | None = None) -> Quaternion:
    """a + ib in the complex plane becomes a + jb in C_j."""
    j = j or default_unit()
    z = complex(z)
    return Quaternion(z.real) + j * z.imag


def quaternion_to_slice(q: Quaternion, j: ImaginaryUnit | None = None, atol: float = 1e-9) -> complex:
    """Inverse of slice_to_quaternion; q must lie in C_j up to atol * max(1, |q|)."""
    j = j or default_unit()
    b = q.s1 * j.s1 + q.s2 * j.s2 + q.s3 * j.s3
    off = (q.im - j * b).norm()
    if off > atol * max(1.0, q.norm()):
        raise QuaternionDomainError(f"{q} does not lie in the slice of {j}.")
    return complex(q.s0, b)


def _perpendicular_unit(u: ImaginaryUnit) -> ImaginaryUnit:
    axis = u.axis
    pick = np.zeros(3)
    pick[int(np.argmin(np.abs(axis)))] = 1.0
    w = np.cross(axis, pick)
    return ImaginaryUnit.from_vector(*w)


def align_unit(u: ImaginaryUnit, j: ImaginaryUnit | None = None) -> Quaternion:
    """
    Unit quaternion a with a^-1 u a = j.

    Uses the geodesic rotation carrying u to j (identity when u == j); for u == -j it is
    the half-turn about a fixed axis perpendicular to u.
    """
    j = j or default_unit()
    # b = 1 - j u satisfies b u b^-1 = j; a = b^-1 up to scale
    if float(np.dot(u.axis, j.axis)) >= 0.0:
        b = Quaternion(1.0) - j * u
    else:
        # half-turn onto -u first, then the short rotation from -u to j
        b = (Quaternion(1.0) + j * u) * _perpendicular_unit(u)
    return b.conj() / b.norm()


def exp_slice(q: Quaternion) -> Quaternion:
    """e^(u + iv) = e^u (cos v + i sin v)."""
    point = slice_split(q)
    z = cmath.exp(point.as_complex())
    return slice_to_quaternion(z, point.j)
