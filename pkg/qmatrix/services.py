from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np

from core.exceptions import (
    DimensionMismatchError,
    NotHermitianError,
    NotInvertibleError,
    NotPositiveError,
)
from core.tolerances import Tolerance, grouping_tolerance, resolve
from quaternion_core.array_utils import as_qarray, qmul
from quaternion_core.models import Quaternion

from .array_utils import (
    chi,
    chi_inverse,
    complex_to_vec,
    qeye,
    qinner,
    qmatvec,
    qouter,
    qvector_norm,
    vec_to_complex,
)
from .eigen_utils import group_points, jacobi_hermitian, symplectic_select
from .models import HermitianEigen, MatrixFlags, QMatrix

logger = logging.getLogger(__name__)


def matmul(a: QMatrix, b: QMatrix) -> QMatrix:
    return a @ b


def adjoint(a: QMatrix) -> QMatrix:
    return a.H


def apply(a: QMatrix, x) -> np.ndarray:
    x = as_qarray(x)
    if x.shape != (a.n, 4):
        raise DimensionMismatchError(f"Vector of shape {x.shape} does not fit a {a.n}x{a.n} matrix.")
    return qmatvec(a.data, x)


def chi_embed(a: QMatrix) -> np.ndarray:
    return chi(a.data)


def chi_extract(m: np.ndarray, tol: Tolerance | None = None) -> QMatrix:
    tol = resolve(tol)
    m = np.asarray(m, dtype=complex)
    scale = float(np.max(np.abs(m), initial=0.0))
    return QMatrix(chi_inverse(m, tol.threshold(scale)))


def operator_norm(a: QMatrix) -> float:
    return a.norm()


def inner(x, y) -> Quaternion:
    return Quaternion.from_array(qinner(as_qarray(x), as_qarray(y)))


def vector_norm(x) -> float:
    return qvector_norm(as_qarray(x))


def identity(n: int) -> QMatrix:
    return QMatrix(qeye(n))


def zeros(n: int) -> QMatrix:
    return QMatrix(np.zeros((n, n, 4)))


def diag(values: Sequence[Quaternion]) -> QMatrix:
    n = len(values)
    out = np.zeros((n, n, 4))
    for k, q in enumerate(values):
        out[k, k] = q.as_array() if isinstance(q, Quaternion) else Quaternion(float(q)).as_array()
    return QMatrix(out)


def scalar_matrix(q: Quaternion, n: int) -> QMatrix:
    """The operator x -> q x (q multiplies every component from the left)."""
    return diag([q] * n)


def outer(y, p: Quaternion | None = None, z=None) -> QMatrix:
    """y p z*: the rank-one map x -> y p <x, z> (z defaults to y, p to 1)."""
    p = Quaternion(1.0) if p is None else p
    y = as_qarray(y)
    z = None if z is None else as_qarray(z)
    return QMatrix(qouter(y, p.as_array(), z))


def qr_orthonormalize(vectors: Iterable, tol: float = 1e-12) -> list[np.ndarray]:
    """Modified Gram-Schmidt over H with one reorthogonalization pass."""
    basis: list[np.ndarray] = []
    for v in vectors:
        w = np.array(as_qarray(v), dtype=float)
        start = qvector_norm(w)
        for _ in range(2):
            for q in basis:
                w = w - qmul(q, qinner(w, q))
        nw = qvector_norm(w)
        if nw <= tol * max(start, 1.0):
            raise NotInvertibleError("Vectors are linearly dependent.")
        basis.append(w / nw)
    return basis


def from_columns(columns: Sequence[np.ndarray]) -> QMatrix:
    return QMatrix(np.stack([as_qarray(c) for c in columns], axis=1))


def _residual(m: QMatrix) -> float:
    return m.norm()


def hermitian_residual(a: QMatrix) -> float:
    return _residual(a - a.H)


def normality_residual(a: QMatrix) -> float:
    return _residual(a @ a.H - a.H @ a)


def hermitian_eigen(a: QMatrix, tol: Tolerance | None = None) -> HermitianEigen:
    """
    Real eigenvalues and orthonormal quaternionic eigenvectors of a Hermitian matrix.

    chi(A) is Hermitian with every eigenvalue doubled; each cluster of its eigenvectors is
    paired down to half as many quaternionic vectors with symplectic_select, and the
    result is orthonormalized over H before the Rayleigh quotients are taken.
    """
    tol = resolve(tol)
    norm_a = a.norm()
    if hermitian_residual(a) > tol.threshold(norm_a):
        raise NotHermitianError(f"Matrix is not Hermitian (residual {hermitian_residual(a):.3e}).")
    n = a.n
    if n == 0:
        return HermitianEigen(np.zeros(0), QMatrix(np.zeros((0, 0, 4))))
    m = chi(a.data)
    m = 0.5 * (m + m.conj().T)
    w, u = jacobi_hermitian(m)
    gap = grouping_tolerance(norm_a)
    vectors: list[np.ndarray] = []
    values: list[float] = []
    for cluster in group_points(w, gap):
        target = (len(cluster) + 1) // 2
        if len(cluster) % 2:
            logger.warning("hermitian_eigen: odd eigenvalue cluster of size %d near %.6g", len(cluster), w[cluster[0]])
        picked = symplectic_select([[u[:, k] for k in cluster]], target)
        vectors.extend(complex_to_vec(vec) for vec in picked)
    if len(vectors) != n:
        raise NotHermitianError(f"Could not pair eigenvectors: found {len(vectors)} of {n}.")
    vectors = qr_orthonormalize(vectors)
    for vec in vectors:
        z = vec_to_complex(vec)
        values.append(float(np.vdot(z, m @ z).real))
    order = np.argsort(np.array(values), kind="stable")
    return HermitianEigen(
        np.array(values)[order],
        from_columns([vectors[k] for k in order]),
    )


def synthesize(eig: HermitianEigen, values: np.ndarray | None = None) -> QMatrix:
    """V diag(values) V* (values default to the eigenvalues)."""
    values = eig.values if values is None else np.asarray(values, dtype=float)
    scaled = eig.vectors.data * values[None, :, None]
    return QMatrix(scaled) @ eig.vectors.H


def sqrt_positive(a: QMatrix, tol: Tolerance | None = None) -> QMatrix:
    tol = resolve(tol)
    eig = hermitian_eigen(a, tol)
    floor = -tol.threshold(a.norm())
    if eig.values.size and eig.values[0] < floor:
        raise NotPositiveError(f"Negative eigenvalue {eig.values[0]:.6g} below {floor:.3e}.")
    return synthesize(eig, np.sqrt(np.clip(eig.values, 0.0, None)))


def abs_op(w: QMatrix, tol: Tolerance | None = None) -> QMatrix:
    """|W| = (W*W)^(1/2)."""
    gram = w.H @ w
    gram = (gram + gram.H) * 0.5
    return sqrt_positive(gram, tol)


def classify(a: QMatrix, tol: Tolerance | None = None) -> MatrixFlags:
    tol = resolve(tol)
    norm_a = a.norm()
    ident = identity(a.n)
    hermitian = hermitian_residual(a) <= tol.threshold(norm_a)
    anti_hermitian = _residual(a + a.H) <= tol.threshold(norm_a)
    unitary = max(_residual(a.H @ a - ident), _residual(a @ a.H - ident)) <= tol.threshold(1.0)
    normal = normality_residual(a) <= tol.threshold(norm_a * norm_a)
    positive = False
    if hermitian:
        values = hermitian_eigen((a + a.H) * 0.5, tol).values
        positive = bool(values.size == 0 or values[0] >= -tol.threshold(norm_a))
    return MatrixFlags(
        hermitian=bool(hermitian),
        anti_hermitian=bool(anti_hermitian),
        unitary=bool(unitary),
        normal=bool(normal),
        positive=positive,
    )


def inverse_matrix(a: QMatrix) -> QMatrix:
    """A^-1 computed on chi(A); the block structure of the result is only checked loosely."""
    try:
        inv = np.linalg.inv(chi(a.data))
    except np.linalg.LinAlgError as exc:
        raise NotInvertibleError("Matrix is singular.") from exc
    scale = max(1.0, float(np.max(np.abs(inv), initial=0.0)))
    return chi_extract(inv, Tolerance(atol=1e-6 * scale, rtol=1e-6))
