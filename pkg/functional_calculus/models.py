"""
Function types fed to the calculi.

C_j-valued data are carried as Python complex numbers: a + ib stands for a + jb. Infinity
(for the unbounded class) is complex("inf").
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

import numpy as np

from core.checks import CheckReport
from core.exceptions import InvalidSliceFunctionError, OverlappingSetsError
from qmatrix.models import QMatrix
from qmatrix.serializers import dump_matrix

INFINITY = complex("inf")

Component = Callable[[float, float], complex]


def is_infinite(value: complex) -> bool:
    return cmath.isinf(value) or cmath.isnan(value)


@dataclass(frozen=True)
class SliceFunction:
    """
    f(u + iv) = alpha(u, v) + i beta(u, v) for every imaginary unit i.

    alpha must be even and beta odd in v. With real alpha and beta the function is
    intrinsic; complex components are read as values in C_j.
    """

    name: str
    alpha: Component
    beta: Component
    intrinsic: bool = True

    def on_slice(self, z: complex) -> complex:
        """Value at u + j v (v of any sign) as a C_j number."""
        u, v = float(z.real), float(z.imag)
        try:
            return complex(self.alpha(u, v)) + 1j * complex(self.beta(u, v))
        except (ZeroDivisionError, OverflowError):
            return INFINITY

    def check_symmetry(self, u: float, v: float, atol: float = 1e-12) -> None:
        """alpha(u, v) = alpha(u, -v), beta(u, v) = -beta(u, -v); real points are skipped."""
        if v == 0.0:
            return
        try:
            a_up, a_down = complex(self.alpha(u, v)), complex(self.alpha(u, -v))
            b_up, b_down = complex(self.beta(u, v)), complex(self.beta(u, -v))
        except (ZeroDivisionError, OverflowError):
            return
        scale = max(1.0, abs(a_up), abs(b_up))
        if abs(a_up - a_down) > atol * scale or abs(b_up + b_down) > atol * scale:
            raise InvalidSliceFunctionError(
                f"{self.name}: alpha must be even and beta odd in v (failed at u={u:.6g}, v={v:.6g})."
            )

    def __add__(self, other: SliceFunction) -> SliceFunction:
        return SliceFunction(
            f"({self.name} + {other.name})",
            lambda u, v: self.alpha(u, v) + other.alpha(u, v),
            lambda u, v: self.beta(u, v) + other.beta(u, v),
            self.intrinsic and other.intrinsic,
        )

    def __mul__(self, other: SliceFunction) -> SliceFunction:
        return SliceFunction(
            f"({self.name} * {other.name})",
            lambda u, v: self.alpha(u, v) * other.alpha(u, v) - self.beta(u, v) * other.beta(u, v),
            lambda u, v: self.alpha(u, v) * other.beta(u, v) + self.beta(u, v) * other.alpha(u, v),
            self.intrinsic and other.intrinsic,
        )

    def conj(self) -> SliceFunction:
        return SliceFunction(
            f"conj({self.name})",
            lambda u, v: np.conj(self.alpha(u, v)),
            lambda u, v: -np.conj(self.beta(u, v)),
            self.intrinsic,
        )

    def compose(self, inner: Callable[[complex], complex]) -> Callable[[complex], complex]:
        """z -> f(inner(z)) on the slice."""
        return lambda z: self.on_slice(inner(z))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SimpleFunction:
    """sum_n c_n chi_{sigma_n} with pairwise disjoint atom sets sigma_n."""

    terms: tuple[tuple[complex, frozenset[int]], ...]
    name: str = "simple"

    def __post_init__(self):
        seen: set[int] = set()
        for _, atoms in self.terms:
            if seen & atoms:
                raise OverlappingSetsError(f"Atoms {sorted(seen & atoms)} appear in more than one set.")
            seen |= atoms

    @classmethod
    def from_values(cls, values: Iterable[complex], name: str = "simple") -> SimpleFunction:
        return cls(tuple((complex(c), frozenset({k})) for k, c in enumerate(values)), name)

    @classmethod
    def indicator(cls, atoms: Iterable[int], name: str | None = None) -> SimpleFunction:
        atoms = frozenset(atoms)
        return cls(((1.0 + 0j, atoms),), name or f"chi:{','.join(map(str, sorted(atoms)))}")

    def values(self, size: int) -> list[complex]:
        out = [0j] * size
        for c, atoms in self.terms:
            for k in atoms:
                if 0 <= k < size:
                    out[k] = complex(c)
        return out

    @property
    def sup_norm(self) -> float:
        return max([abs(c) for c, atoms in self.terms if atoms] + [0.0])

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BInftyFunction:
    """Atomwise values in C_j or infinity; infinity is allowed only on null atoms for bounded use."""

    values: tuple[complex, ...]
    name: str = "binf"

    @classmethod
    def from_callable(cls, points: Iterable[complex], func: Callable[[complex], complex], name: str = "binf") -> BInftyFunction:
        out = []
        for z in points:
            try:
                out.append(complex(func(z)))
            except (ZeroDivisionError, OverflowError):
                out.append(INFINITY)
        return cls(tuple(out), name)

    @property
    def infinite_atoms(self) -> tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.values) if is_infinite(c))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BInftyResult:
    """
    f(T) for f with possible infinite values. The operator acts on the range of `domain`;
    `infinite_atoms` are the live atoms sent to infinity and `bounding_sequence` lists the
    increasing atom sets sigma_n.
    """

    operator: QMatrix
    domain: QMatrix
    infinite_atoms: tuple[int, ...]
    bounding_sequence: tuple[tuple[int, ...], ...]
    checks: CheckReport = field(default_factory=lambda: CheckReport("binf"))

    @property
    def full_domain(self) -> bool:
        return not self.infinite_atoms

    def in_domain(self, x, atol: float = 1e-10) -> bool:
        x = np.asarray(x, dtype=float)
        outside = x - self.domain @ x
        return float(np.sqrt(np.sum(outside * outside))) <= atol * max(1.0, float(np.sqrt(np.sum(x * x))))

    def as_dict(self) -> dict[str, Any]:
        return {
            "operator": dump_matrix(self.operator),
            "domain": dump_matrix(self.domain),
            "infinite_atoms": list(self.infinite_atoms),
            "full_domain": self.full_domain,
        }
