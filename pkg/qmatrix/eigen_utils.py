"""
Dense complex eigensolvers used on chi images.

complex_schur: Householder reduction to Hessenberg form followed by implicitly shifted
single-shift QR with Givens rotations (Wilkinson shift, exceptional shift every 10
stalled iterations). jacobi_hermitian: cyclic complex Jacobi. Both are deterministic.
"""
from __future__ import annotations

import logging

import numpy as np
from django.conf import settings

from core.exceptions import ConvergenceError

from .array_utils import jmap

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps
TINY = np.finfo(float).tiny


def hessenberg_reduce(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return (H, Q) with m = Q H Q^H and H upper Hessenberg."""
    h = np.array(m, dtype=complex)
    n = h.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        # reflector P = I - 2 v v^H on indices k+1..n-1, applied from both sides
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


def _givens(x: complex, y: complex) -> np.ndarray:
    """2x2 unitary G with G @ [x, y] = [r, 0], r >= 0."""
    r = np.hypot(abs(x), abs(y))
    if r == 0.0:
        return np.eye(2, dtype=complex)
    return np.array([[np.conj(x) / r, np.conj(y) / r], [-y / r, x / r]], dtype=complex)


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    mid = 0.5 * (a + d)
    mu1, mu2 = mid + disc, mid - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def complex_schur(m: np.ndarray, max_iter: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Complex Schur form m = Q S Q^H with S upper triangular.

    Args:
        m: square complex matrix
        max_iter: QR sweeps allowed per deflated eigenvalue (settings.QSPEC_EIG_MAX_ITER)

    Raises:
        ConvergenceError: an eigenvalue failed to deflate within max_iter sweeps
    """
    if max_iter is None:
        max_iter = int(getattr(settings, "QSPEC_EIG_MAX_ITER", 60))
    h, q = hessenberg_reduce(m)
    n = h.shape[0]
    scale = max(float(np.linalg.norm(h)), TINY)
    hi = n - 1
    stalled = 0
    sweeps = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            ref = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if ref == 0.0:
                ref = scale
            if abs(h[lo, lo - 1]) <= EPS * ref:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue

        stalled += 1
        sweeps += 1
        if stalled > max_iter:
            raise ConvergenceError(
                f"QR iteration did not deflate eigenvalue {hi} of {n} within {max_iter} sweeps."
            )
        if stalled % 10 == 0:
            extra = abs(h[hi - 1, hi - 2]) if hi - 2 >= lo else 0.0
            mu = h[hi, hi] + 0.75 * (abs(h[hi, hi - 1].real) + extra)
        else:
            mu = _wilkinson_shift(h, hi)

        x, y = h[lo, lo] - mu, h[lo + 1, lo]
        for k in range(lo, hi):
            if k > lo:
                x, y = h[k, k - 1], h[k + 1, k - 1]
            g = _givens(x, y)
            c0 = lo if k == lo else k - 1
            h[k:k + 2, c0:] = g @ h[k:k + 2, c0:]
            r1 = min(k + 3, hi + 1)
            h[:r1, k:k + 2] = h[:r1, k:k + 2] @ g.conj().T
            q[:, k:k + 2] = q[:, k:k + 2] @ g.conj().T
            if k > lo:
                h[k + 1, k - 1] = 0.0
    logger.debug("complex_schur: n=%d, %d QR sweeps", n, sweeps)
    return np.triu(h), q


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(max(float(np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2)), 0.0)))


def _jacobi_sweep(a: np.ndarray, v: np.ndarray) -> None:
    n = a.shape[0]
    for p in range(n - 1):
        for r in range(p + 1, n):
            apr = a[p, r]
            mag = abs(apr)
            if mag == 0.0:
                continue
            phase = apr / mag
            tau = (a[r, r].real - a[p, p].real) / (2.0 * mag)
            t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)
            idx = [p, r]
            a[:, idx] = a[:, idx] @ g
            a[idx, :] = g.conj().T @ a[idx, :]
            v[:, idx] = v[:, idx] @ g
            a[p, r] = a[r, p] = 0.0
            a[p, p] = a[p, p].real
            a[r, r] = a[r, r].real


def jacobi_hermitian(m: np.ndarray, max_sweeps: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns (w, V), eigenvalues ascending, m = V diag(w) V^H. Between sweeps V is
    re-orthonormalized and the iterate is rebuilt as V^H m V, so the stopping test
    measures the off-diagonal of the true matrix.
    """
    if max_sweeps is None:
        max_sweeps = int(getattr(settings, "QSPEC_JACOBI_MAX_SWEEPS", 60))
    m = np.asarray(m, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    n = m.shape[0]
    v = np.eye(n, dtype=complex)
    a = m.copy()
    scale = max(float(np.linalg.norm(m)), TINY)
    target = n * EPS * scale
    # an off-norm that stalls below floor is rounding noise from rebuilding V^H m V
    floor = 64 * n * EPS * scale
    converged = n <= 1
    previous = np.inf
    for sweep in range(max_sweeps + 1):
        if sweep:
            v, _ = np.linalg.qr(v)
            a = v.conj().T @ m @ v
            a = 0.5 * (a + a.conj().T)
        off = _off_norm(a) if n > 1 else 0.0
        if converged or off <= target or (off <= floor and off > 0.5 * previous):
            converged = True
            break
        previous = off
        if sweep < max_sweeps:
            _jacobi_sweep(a, v)
    if not converged:
        raise ConvergenceError(f"Jacobi did not converge within {max_sweeps} sweeps.")
    logger.debug("jacobi_hermitian: n=%d, %d sweeps", n, sweep)
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def group_points(values: np.ndarray, gap: float) -> list[list[int]]:
    """
    Cluster complex numbers by (Re, |Im|).

    Points join the first cluster whose first member is within gap in both coordinates;
    clusters come out ordered by (Re, |Im|) of their first member.
    """
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((np.abs(values.imag), values.real))
    clusters: list[list[int]] = []
    for idx in order:
        z = values[idx]
        for cluster in clusters:
            w = values[cluster[0]]
            if abs(z.real - w.real) <= gap and abs(abs(z.imag) - abs(w.imag)) <= gap:
                cluster.append(int(idx))
                break
        else:
            clusters.append([int(idx)])
    return clusters


def _residual(u: np.ndarray, chosen: list[np.ndarray]) -> np.ndarray:
    w = u.copy()
    for _ in range(2):
        for c in chosen:
            w -= c * np.vdot(c, w)
            jc = jmap(c)
            w -= jc * np.vdot(jc, w)
    return w


def symplectic_select(groups: list[list[np.ndarray]], target: int, floor: float = 1e-3) -> list[np.ndarray]:
    """
    Pick `target` orthonormal complex vectors from a J-invariant span, none of them
    overlapping another's J-partner.

    Groups are consumed in order; inside a group the candidate with the largest residual
    against the chosen vectors and their partners is taken next.
    """
    chosen: list[np.ndarray] = []
    for group in groups:
        pool = [np.asarray(u, dtype=complex) for u in group]
        while pool and len(chosen) < target:
            residuals = [_residual(u, chosen) for u in pool]
            norms = [np.linalg.norm(w) for w in residuals]
            k = int(np.argmax(norms))
            if norms[k] < floor:
                break
            chosen.append(residuals[k] / norms[k])
            pool.pop(k)
        if len(chosen) >= target:
            break
    return chosen
