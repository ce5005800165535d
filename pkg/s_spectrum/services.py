from __future__ import annotations

import logging
import math

import numpy as np

from core.checks import CheckReport
from core.exceptions import ScalarFactorSingularError, SpectrumPointError
from core.tolerances import Tolerance, grouping_tolerance, resolve
from qmatrix.array_utils import chi, complex_to_vec, normalize_phase, qouter
from qmatrix.eigen_utils import complex_schur, group_points, symplectic_select
from qmatrix.models import QMatrix
from qmatrix.sampling import random_unit_imaginary
from qmatrix.services import classify, identity, inverse_matrix, normality_residual, scalar_matrix
from quaternion_core.array_utils import qmul
from quaternion_core.models import ImaginaryUnit, Quaternion
from quaternion_core.services import align_unit, default_unit, parse_unit

from .models import EigenSphere, ResidualReport, SSpectrum

logger = logging.getLogger(__name__)


def pseudo_resolvent(t: QMatrix, s: Quaternion) -> QMatrix:
    """T^2 - 2 Re(s) T + |s|^2 I; depends on s only through Re(s) and |s|."""
    modulus2 = s.re * s.re + s.abs_im * s.abs_im
    return t @ t - t * (2.0 * s.re) + identity(t.n) * modulus2


def _smallest_singular_value(a: QMatrix) -> float:
    if a.n == 0:
        return math.inf
    return float(np.linalg.svd(chi(a.data), compute_uv=False)[-1])


def in_s_resolvent_set(t: QMatrix, s: Quaternion, tol: Tolerance | None = None) -> bool:
    """
    True iff the pseudo-resolvent at s is boundedly invertible: its smallest singular value
    is at least the tolerance threshold at scale max(1, ||T||^2).

    At finite dimension dense range and bounded inverse are the same condition.
    """
    tol = resolve(tol)
    scale = max(1.0, t.norm() ** 2)
    return _smallest_singular_value(pseudo_resolvent(t, s)) >= tol.threshold(scale)


def s_spectrum(t: QMatrix, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> SSpectrum:
    """
    Spheres of the S-spectrum from the eigenvalues of chi(T).

    chi eigenvalues come in conjugate pairs; they are clustered by (Re, |Im|) and every
    cluster of size 2m becomes one sphere of multiplicity m. When T is normal each sphere
    also gets right eigenvectors y (T y = y rep) and its projection sum y y*.
    """
    j = j or default_unit()
    tol = resolve(tol)
    n = t.n
    norm_t = t.norm()
    normal = normality_residual(t) <= tol.threshold(norm_t * norm_t)
    if not normal:
        logger.warning("s_spectrum: matrix is not normal; spheres are returned without projections")

    schur, q = complex_schur(chi(t.data))
    lam = np.diag(schur)
    gap = grouping_tolerance(norm_t)
    rotate = align_unit(parse_unit("e1"), j).as_array()

    spheres: list[EigenSphere] = []
    for cluster in group_points(lam, gap):
        values = lam[cluster]
        u = float(np.mean(values.real))
        v = float(np.mean(np.abs(values.imag)))
        if v < gap:
            v = 0.0
        multiplicity = (len(cluster) + 1) // 2
        if len(cluster) % 2:
            logger.warning("s_spectrum: odd cluster of %d chi eigenvalues at (%.6g, %.6g)", len(cluster), u, v)
        rep = Quaternion(u) + j * v
        projection = None
        vectors: tuple[np.ndarray, ...] = ()
        if normal:
            upper = [q[:, k] for k in cluster if lam[k].imag >= 0]
            lower = [q[:, k] for k in cluster if lam[k].imag < 0]
            picked = symplectic_select([upper, lower], multiplicity)
            vectors = tuple(qmul(complex_to_vec(normalize_phase(p)), rotate) for p in picked)
            projection = QMatrix(sum((qouter(y, np.array([1.0, 0, 0, 0])) for y in vectors), np.zeros((n, n, 4))))
        spheres.append(EigenSphere(rep, multiplicity, projection, vectors))

    spectrum = SSpectrum(tuple(spheres), j, n, bool(normal))
    logger.debug("s_spectrum: n=%d, %d spheres, normal=%s", n, len(spheres), normal)
    return spectrum


def _checked_pseudo_inverse(t: QMatrix, s: Quaternion, tol: Tolerance) -> QMatrix:
    if not in_s_resolvent_set(t, s, tol):
        raise SpectrumPointError(f"{s} lies in the S-spectrum; the S-resolvent is undefined there.")
    return inverse_matrix(pseudo_resolvent(t, s))


def s_resolvent_left(t: QMatrix, s: Quaternion, tol: Tolerance | None = None) -> QMatrix:
    """S_L^-1(s, T) = -(T^2 - 2 Re(s) T + |s|^2 I)^-1 (T - conj(s) I)."""
    tol = resolve(tol)
    q_inv = _checked_pseudo_inverse(t, s, tol)
    return -(q_inv @ (t - scalar_matrix(s.conj(), t.n)))


def s_resolvent_right(t: QMatrix, s: Quaternion, tol: Tolerance | None = None) -> QMatrix:
    """S_R^-1(s, T) = -(T - conj(s) I)(T^2 - 2 Re(s) T + |s|^2 I)^-1."""
    tol = resolve(tol)
    q_inv = _checked_pseudo_inverse(t, s, tol)
    return -((t - scalar_matrix(s.conj(), t.n)) @ q_inv)


def check_resolvent_equation(
    t: QMatrix,
    s: Quaternion,
    p: Quaternion,
    tol: Tolerance | None = None,
) -> ResidualReport:
    """
    Compare S_R^-1(s,T) S_L^-1(p,T) with
    {(S_R^-1(s,T) - S_L^-1(p,T)) p - conj(s) (S_R^-1(s,T) - S_L^-1(p,T))} (p^2 - 2 s0 p + |s|^2)^-1,
    scalars multiplying matrix entries on the side they are written.
    """
    tol = resolve(tol)
    factor = p * p - p * (2.0 * s.re) + (s.re * s.re + s.abs_im * s.abs_im)
    if factor.norm() <= tol.threshold(max(1.0, p.norm() ** 2 + s.norm() ** 2)):
        raise ScalarFactorSingularError(f"p = {p} lies on the sphere of s = {s}.")
    right = s_resolvent_right(t, s, tol)
    left = s_resolvent_left(t, p, tol)
    lhs = right @ left
    diff = right - left
    rhs = (diff * p - s.conj() * diff) * factor.inverse()
    return ResidualReport(lhs.norm(), rhs.norm(), (lhs - rhs).norm())


def spectrum_bound_check(
    t: QMatrix,
    spectrum: SSpectrum | None = None,
    tol: Tolerance | None = None,
) -> CheckReport:
    """|rep| <= ||T|| for every sphere, plus the class-specific containments."""
    tol = resolve(tol)
    spectrum = spectrum or s_spectrum(t, tol=tol)
    norm_t = t.norm()
    threshold = tol.threshold(max(1.0, norm_t))
    report = CheckReport("spectrum_bound")
    reps = spectrum.reps
    report.residual_below("norm_bound", max([r.norm() - norm_t for r in reps] + [0.0]), threshold)
    flags = classify(t, tol)
    if flags.positive:
        worst = max([max(r.abs_im, -r.re, r.re - norm_t) for r in reps] + [0.0])
        report.residual_below("positive_in_0_norm", worst, threshold)
    elif flags.hermitian:
        worst = max([max(r.abs_im, abs(r.re) - norm_t) for r in reps] + [0.0])
        report.residual_below("hermitian_real", worst, threshold)
    if flags.anti_hermitian:
        report.residual_below("anti_hermitian_imaginary", max([abs(r.re) for r in reps] + [0.0]), threshold)
    if flags.unitary:
        report.residual_below("unitary_on_sphere", max([abs(r.norm() - 1.0) for r in reps] + [0.0]), threshold)
    return report


def _distance_to_sphere(u: float, v: float, sphere: EigenSphere) -> float:
    return math.hypot(u - sphere.u, v - sphere.v)


def axial_symmetry_check(
    t: QMatrix,
    samples: int = 20,
    rng: np.random.Generator | None = None,
    spectrum: SSpectrum | None = None,
    tol: Tolerance | None = None,
) -> CheckReport:
    """
    Every sphere is axially symmetric: u + i v is a spectrum point for sampled units i,
    while points at distance >= 0.1 from every sphere are in the S-resolvent set.
    """
    tol = resolve(tol)
    rng = rng or np.random.default_rng(0)
    spectrum = spectrum or s_spectrum(t, tol=tol)
    on_failures = 0
    off_failures = 0
    off_tested = 0
    for sphere in spectrum.spheres:
        for _ in range(samples):
            i = random_unit_imaginary(rng)
            point = Quaternion(sphere.u) + i * sphere.v
            if in_s_resolvent_set(t, point, tol):
                on_failures += 1

            angle = rng.uniform(0.0, math.pi)
            radius = rng.uniform(0.1, 0.5)
            u = sphere.u + radius * math.cos(angle)
            v = sphere.v + radius * math.sin(angle)
            if min(_distance_to_sphere(u, v, other) for other in spectrum.spheres) < 0.1:
                continue
            off_tested += 1
            if not in_s_resolvent_set(t, Quaternion(u) + i * v, tol):
                off_failures += 1

    report = CheckReport("axial_symmetry")
    report.residual_below("on_sphere_in_spectrum", on_failures, 0, f"{samples} units per sphere")
    report.residual_below("off_sphere_in_resolvent", off_failures, 0, f"{off_tested} points tested")
    return report
