"""
In-memory matrix types. No ORM models: a QMatrix wraps a read-only float array of shape
(n, n, 4) and acts on column vectors from the left, scalars acting on the right.
"""
from __future__ import annotations

from dataclasses import dataclass
from numbers import Real

import numpy as np

from core.exceptions import DimensionMismatchError, MatrixFormatError
from quaternion_core.array_utils import as_qarray, qmul
from quaternion_core.models import Quaternion

from .array_utils import chi, qadjoint, qmatmul, qmatvec, norm2


class QMatrix:
    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(as_qarray(data), dtype=float)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1]:
            raise MatrixFormatError(f"QMatrix data must have shape (n, n, 4), got {arr.shape}.")
        if not np.all(np.isfinite(arr)):
            raise MatrixFormatError("QMatrix entries must be finite.")
        arr.setflags(write=False)
        self._data = arr

    @classmethod
    def from_entries(cls, rows) -> QMatrix:
        """Build from nested rows of Quaternion or 4-sequences."""
        return cls([[q.as_list() if isinstance(q, Quaternion) else list(q) for q in row] for row in rows])

    @classmethod
    def from_complex(cls, z1, z2=None) -> QMatrix:
        """T = Z1 + Z2 e2 with Z1, Z2 complex (read in C_{e1})."""
        z1 = np.asarray(z1, dtype=complex)
        z2 = np.zeros_like(z1) if z2 is None else np.asarray(z2, dtype=complex)
        return cls(np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1))

    @property
    def n(self) -> int:
        return self._data.shape[0]

    @property
    def data(self) -> np.ndarray:
        return self._data

    def entry(self, i: int, k: int) -> Quaternion:
        return Quaternion.from_array(self._data[i, k])

    def column(self, k: int) -> np.ndarray:
        return self._data[:, k, :].copy()

    @property
    def H(self) -> QMatrix:
        return QMatrix(qadjoint(self._data))

    def chi(self) -> np.ndarray:
        return chi(self._data)

    def norm(self) -> float:
        return norm2(self._data)

    def _check(self, other: QMatrix) -> None:
        if other.n != self.n:
            raise DimensionMismatchError(f"Dimension mismatch: {self.n} vs {other.n}.")

    def __add__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        self._check(other)
        return QMatrix(self._data + other._data)

    def __sub__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        self._check(other)
        return QMatrix(self._data - other._data)

    def __neg__(self):
        return QMatrix(-self._data)

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            self._check(other)
            return QMatrix(qmatmul(self._data, other._data))
        if isinstance(other, np.ndarray):
            return qmatvec(self._data, as_qarray(other))
        return NotImplemented

    def __mul__(self, other):
        """Real scaling, or right multiplication of every entry by a quaternion."""
        if isinstance(other, Real):
            return QMatrix(self._data * float(other))
        if isinstance(other, Quaternion):
            return QMatrix(qmul(self._data, other.as_array()))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Real):
            return QMatrix(self._data * float(other))
        if isinstance(other, Quaternion):
            return QMatrix(qmul(other.as_array(), self._data))
        return NotImplemented

    def allclose(self, other: QMatrix, atol: float) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self._data - other._data), initial=0.0) <= atol)

    def __eq__(self, other):
        if not isinstance(other, QMatrix):
            return NotImplemented
        return self._data.shape == other._data.shape and bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"QMatrix(n={self.n})"


@dataclass(frozen=True)
class MatrixFlags:
    hermitian: bool
    anti_hermitian: bool
    unitary: bool
    normal: bool
    positive: bool

    def as_dict(self) -> dict[str, bool]:
        return {
            "hermitian": self.hermitian,
            "anti_hermitian": self.anti_hermitian,
            "unitary": self.unitary,
            "normal": self.normal,
            "positive": self.positive,
        }


@dataclass(frozen=True)
class HermitianEigen:
    """A = V diag(values) V*, columns of V orthonormal right eigenvectors."""

    values: np.ndarray
    vectors: QMatrix

    def vector(self, k: int) -> np.ndarray:
        return self.vectors.column(k)
