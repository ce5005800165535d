"""
Array-level helpers for quaternionic matrices stored as float arrays of shape (n, n, 4)
and vectors of shape (n, 4).

The complex adjoint representation (chi) writes T = T1 + T2 e2 with T1, T2 over C_{e1}
and maps it to [[T1, T2], [-conj(T2), conj(T1)]]. A vector x = x1 + x2 e2 maps to
[x1; -conj(x2)], so chi(T) @ u(x) == u(T x) and u(x lam) == u(x) lam for lam in C_{e1}.
"""
from __future__ import annotations

import numpy as np

from core.exceptions import DimensionMismatchError, SymplecticStructureError
from quaternion_core.array_utils import from_complex_pair, qconj, qmul, to_complex_pair
from quaternion_core.constants import MULTIPLICATION_TABLE


def qmatmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(f"Cannot multiply {a.shape[:2]} by {b.shape[:2]}.")
    return np.einsum("ija,jkb,abc->ikc", a, b, MULTIPLICATION_TABLE)


def qmatvec(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    if a.shape[1] != x.shape[0]:
        raise DimensionMismatchError(f"Cannot apply {a.shape[:2]} matrix to a length-{x.shape[0]} vector.")
    return np.einsum("ija,jb,abc->ic", a, x, MULTIPLICATION_TABLE)


def qadjoint(a: np.ndarray) -> np.ndarray:
    return qconj(a).transpose(1, 0, 2)


def qeye(n: int) -> np.ndarray:
    out = np.zeros((n, n, 4))
    out[np.arange(n), np.arange(n), 0] = 1.0
    return out


def qinner(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """<x, y> = sum_i conj(y_i) x_i, right-linear in x."""
    if x.shape != y.shape:
        raise DimensionMismatchError(f"Inner product of vectors with shapes {x.shape} and {y.shape}.")
    return qmul(qconj(y), x).sum(axis=0)


def qvector_norm(x: np.ndarray) -> float:
    return float(np.sqrt(np.sum(x * x)))


def qouter(y: np.ndarray, p: np.ndarray, z: np.ndarray | None = None) -> np.ndarray:
    """Matrix with entries y_i p conj(z_l): the map x -> y p <x, z>."""
    z = y if z is None else z
    left = qmul(y, p)
    return qmul(left[:, None, :], qconj(z)[None, :, :])


def chi(a: np.ndarray) -> np.ndarray:
    t1, t2 = to_complex_pair(a)
    return np.block([[t1, t2], [-t2.conj(), t1.conj()]])


def chi_inverse(m: np.ndarray, atol: float) -> np.ndarray:
    """Recover the quaternionic matrix; raises when the block symmetry is off by more than atol."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise SymplecticStructureError(f"chi images are square of even size, got {m.shape}.")
    n = m.shape[0] // 2
    m11, m12, m21, m22 = m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]
    defect = max(
        float(np.max(np.abs(m22 - m11.conj()), initial=0.0)),
        float(np.max(np.abs(m21 + m12.conj()), initial=0.0)),
    )
    if defect > atol:
        raise SymplecticStructureError(f"Block symmetry violated by {defect:.3e}.")
    t1 = 0.5 * (m11 + m22.conj())
    t2 = 0.5 * (m12 - m21.conj())
    return from_complex_pair(t1, t2)


def vec_to_complex(x: np.ndarray) -> np.ndarray:
    x1, x2 = to_complex_pair(x)
    return np.concatenate([x1, -x2.conj()])


def complex_to_vec(u: np.ndarray) -> np.ndarray:
    n = u.shape[0] // 2
    return from_complex_pair(u[:n], -u[n:].conj())


def jmap(u: np.ndarray) -> np.ndarray:
    """Complex image of x e2 given the image u of x."""
    n = u.shape[0] // 2
    return np.concatenate([u[n:].conj(), -u[:n].conj()])


def norm2(a: np.ndarray) -> float:
    """Operator norm on H^n, i.e. the largest singular value of chi(a)."""
    if a.shape[0] == 0:
        return 0.0
    return float(np.linalg.svd(chi(a), compute_uv=False)[0])


def normalize_phase(u: np.ndarray, rel: float = 1e-8) -> np.ndarray:
    """Rotate a complex vector by a unit phase so its first significant entry is real and positive."""
    mags = np.abs(u)
    top = float(np.max(mags, initial=0.0))
    if top == 0.0:
        return u
    k = int(np.argmax(mags > rel * top))
    return u * (np.conj(u[k]) / mags[k])
