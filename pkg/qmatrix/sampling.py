"""
Seeded random generators for property suites. Every function takes a numpy Generator;
callers derive per-trial generators with trial_generators().
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from django.conf import settings

from quaternion_core.models import ImaginaryUnit, Quaternion

from .models import QMatrix
from .services import from_columns, qr_orthonormalize


def trial_generators(count: int, seed: int | None = None) -> list[np.random.Generator]:
    if seed is None:
        seed = int(getattr(settings, "QSPEC_SEED", 42))
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def random_quaternion(rng: np.random.Generator, scale: float = 1.0) -> Quaternion:
    return Quaternion.from_array(rng.standard_normal(4) * scale)


def random_unit_imaginary(rng: np.random.Generator) -> ImaginaryUnit:
    while True:
        x, y, z = rng.standard_normal(3)
        if x * x + y * y + z * z > 1e-12:
            return ImaginaryUnit.from_vector(x, y, z)


def random_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((n, 4))


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    x = random_vector(n, rng)
    return x / np.sqrt(np.sum(x * x))


def random_matrix(n: int, rng: np.random.Generator, scale: float = 1.0) -> QMatrix:
    return QMatrix(rng.standard_normal((n, n, 4)) * scale)


def random_unitary(n: int, rng: np.random.Generator) -> QMatrix:
    columns = [rng.standard_normal((n, 4)) for _ in range(n)]
    return from_columns(qr_orthonormalize(columns))


def random_hermitian(n: int, rng: np.random.Generator, scale: float = 1.0) -> QMatrix:
    g = random_matrix(n, rng, scale)
    return (g + g.H) * 0.5


def conjugate_diagonal(values: Sequence[Quaternion], u: QMatrix) -> QMatrix:
    """U diag(values) U*."""
    n = len(values)
    d = np.zeros((n, n, 4))
    for k, q in enumerate(values):
        d[k, k] = q.as_array()
    return u @ QMatrix(d) @ u.H


def random_normal(
    n: int,
    rng: np.random.Generator,
    scale: float = 1.0,
    values: Sequence[Quaternion] | None = None,
) -> QMatrix:
    """Normal matrix U diag(q) U* with random quaternion eigenvalues (or the given ones)."""
    if values is None:
        values = [random_quaternion(rng, scale) for _ in range(n)]
    return conjugate_diagonal(values, random_unitary(n, rng))
