"""
Value types for the T = A + J B decomposition and the atomic spectral measure.

A measure on sigma_S(T) cap C_j^+ is finite here: one atom per sphere, carrying the point
p in C_j^+, the projection E({p}) and the part of the basis N_j spanning its range.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable

import numpy as np

from qmatrix.array_utils import qouter
from qmatrix.models import QMatrix
from qmatrix.serializers import dump_matrix
from quaternion_core.models import ImaginaryUnit, Quaternion


@dataclass(frozen=True)
class DecompositionABJ:
    """
    T = A + J B with A self-adjoint, B positive and J anti-self-adjoint unitary.

    `kernel` holds the orthonormal vectors of Ker(T - T*) on which J was fixed by
    convention (left multiplication by j in an eigenbasis of A).
    """

    A: QMatrix
    B: QMatrix
    J: QMatrix
    j: ImaginaryUnit
    kernel: tuple[np.ndarray, ...] = field(default=(), compare=False)

    @property
    def kernel_dim(self) -> int:
        return len(self.kernel)

    @property
    def kernel_flag(self) -> str:
        if not self.kernel:
            return "none"
        return "full" if self.kernel_dim == self.A.n else "partial"

    def as_dict(self) -> dict[str, Any]:
        return {
            "A": dump_matrix(self.A),
            "B": dump_matrix(self.B),
            "J": dump_matrix(self.J),
            "j": self.j.as_list(),
            "kernel_dim": self.kernel_dim,
            "kernel_flag": self.kernel_flag,
        }


@dataclass(frozen=True)
class HilbertBasisNj:
    """Orthonormal y_1..y_n with J y_k = y_k j."""

    vectors: tuple[np.ndarray, ...]
    j: ImaginaryUnit

    @property
    def n(self) -> int:
        return len(self.vectors)

    def matrix(self) -> QMatrix:
        if not self.vectors:
            return QMatrix(np.zeros((0, 0, 4)))
        return QMatrix(np.stack(self.vectors, axis=1))

    def left_scalar(self, p: Quaternion) -> QMatrix:
        """L_p x = sum_y y p <x, y>."""
        dim = self.vectors[0].shape[0] if self.vectors else 0
        total = np.zeros((dim, dim, 4))
        for y in self.vectors:
            total = total + qouter(y, p.as_array())
        return QMatrix(total)

    def as_lists(self) -> list[list[list[float]]]:
        return [np.asarray(y, dtype=float).tolist() for y in self.vectors]


@dataclass(frozen=True)
class Atom:
    p: Quaternion
    projection: QMatrix
    vectors: tuple[np.ndarray, ...] = field(default=(), compare=False)

    @property
    def multiplicity(self) -> int:
        return len(self.vectors)

    @property
    def is_null(self) -> bool:
        return not self.vectors

    def as_dict(self) -> dict[str, Any]:
        return {"p": self.p.as_list(), "projection": dump_matrix(self.projection)}


def _sort_key(p: Quaternion) -> tuple[float, float]:
    return (p.re, p.abs_im)


@dataclass(frozen=True)
class SpectralMeasure:
    atoms: tuple[Atom, ...]
    j: ImaginaryUnit
    n: int

    @property
    def points(self) -> list[Quaternion]:
        return [a.p for a in self.atoms]

    @property
    def basis(self) -> HilbertBasisNj:
        return HilbertBasisNj(tuple(y for atom in self.atoms for y in atom.vectors), self.j)

    @property
    def live_atoms(self) -> list[int]:
        return [k for k, atom in enumerate(self.atoms) if not atom.is_null]

    def projection_of(self, indices: Iterable[int]) -> QMatrix:
        """E(sigma) for sigma the union of the listed atoms."""
        total = np.zeros((self.n, self.n, 4))
        for k in sorted(set(indices)):
            total = total + self.atoms[k].projection.data
        return QMatrix(total)

    def with_null_atom(self, p: Quaternion) -> SpectralMeasure:
        """Same measure with an extra atom of zero projection at p."""
        null = Atom(p, QMatrix(np.zeros((self.n, self.n, 4))))
        atoms = sorted(self.atoms + (null,), key=lambda a: _sort_key(a.p))
        return replace(self, atoms=tuple(atoms))

    def csv_rows(self) -> list[tuple[float, float, int]]:
        return [(a.p.re, a.p.abs_im, a.multiplicity) for a in self.atoms]

    def as_dict(self) -> dict[str, Any]:
        return {
            "j": self.j.as_list(),
            "atoms": [a.as_dict() for a in self.atoms],
            "basis": self.basis.as_lists(),
        }


@dataclass(frozen=True)
class AtomicMeasure:
    """Quaternion-valued measure mu_{x,y} given by its masses on the atoms."""

    points: tuple[Quaternion, ...]
    masses: tuple[Quaternion, ...]

    def total(self, indices: Iterable[int] | None = None) -> Quaternion:
        chosen = range(len(self.masses)) if indices is None else sorted(set(indices))
        out = Quaternion(0.0)
        for k in chosen:
            out = out + self.masses[k]
        return out

    def conj(self) -> AtomicMeasure:
        return AtomicMeasure(self.points, tuple(m.conj() for m in self.masses))

    def distance(self, other: AtomicMeasure) -> float:
        if len(other.masses) != len(self.masses):
            return float("inf")
        return max([(a - b).norm() for a, b in zip(self.masses, other.masses)] + [0.0])

    def as_dict(self) -> dict[str, Any]:
        return {
            "points": [p.as_list() for p in self.points],
            "masses": [m.as_list() for m in self.masses],
        }
