"""
Vectorized quaternion arithmetic on float arrays whose last axis holds [s0, s1, s2, s3].

The scalar Quaternion type and every matrix routine in qmatrix sit on these helpers.
"""
from __future__ import annotations

import numpy as np

from core.exceptions import MatrixFormatError

from .constants import CONJUGATION_SIGNS, MULTIPLICATION_TABLE


def as_qarray(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 4:
        raise MatrixFormatError(f"Expected a trailing axis of length 4, got shape {arr.shape}.")
    return arr


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcast over leading axes."""
    return np.einsum("...a,...b,abc->...c", a, b, MULTIPLICATION_TABLE)


def qconj(a: np.ndarray) -> np.ndarray:
    return a * CONJUGATION_SIGNS


def qnorm(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(a * a, axis=-1))


def qreal(x) -> np.ndarray:
    """Embed real scalars (any shape) as quaternion arrays."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


def to_complex_pair(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a = z1 + z2 e2 with z1, z2 in C_{e1} identified with numpy complex."""
    return a[..., 0] + 1j * a[..., 1], a[..., 2] + 1j * a[..., 3]


def from_complex_pair(z1, z2) -> np.ndarray:
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    return np.stack([z1.real, z1.imag, z2.real, z2.imag], axis=-1)


def left_regular_matrix(a: np.ndarray) -> np.ndarray:
    """4x4 real matrix L with L @ b == qmul(a, b)."""
    return np.einsum("a,abc->cb", np.asarray(a, dtype=float), MULTIPLICATION_TABLE)
