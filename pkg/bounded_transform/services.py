from __future__ import annotations

import logging
import math
from typing import Any, Iterable

import numpy as np
from django.conf import settings

from core.checks import CheckReport
from core.exceptions import (
    DimensionMismatchError,
    InconsistentMeasureError,
    NotNormalError,
    QuaternionDomainError,
)
from core.tolerances import Tolerance, resolve
from functional_calculus.models import INFINITY, BInftyFunction
from functional_calculus.services import calc_binf, pushforward_values
from qmatrix.array_utils import qinner
from qmatrix.models import HermitianEigen, QMatrix
from qmatrix.sampling import conjugate_diagonal, random_unitary
from qmatrix.serializers import dump_matrix
from qmatrix.services import classify, hermitian_eigen, identity, inverse_matrix, normality_residual, synthesize
from quaternion_core.models import ImaginaryUnit, Quaternion
from quaternion_core.services import default_unit, exp_slice, quaternion_to_slice
from spectral_core.services import integrate, reconstruct, spectral_measure

from .models import Recovery, TransformPair

logger = logging.getLogger(__name__)

ROUNDTRIP_RTOL = 1e-8
# above this norm the roundtrip is only held to RELAXED_RTOL
RELAXED_NORM = 1e3
RELAXED_RTOL = 1e-6
DIRECT_ROUTE_MAX_NORM = 10.0


def _z_tolerance(tol: Tolerance, norm_t: float) -> Tolerance:
    """Z_T carries the rounding of T, so relative checks on Z scale with max(1, ||T||)."""
    return Tolerance(tol.atol, tol.rtol * max(1.0, norm_t))


def _gram(t: QMatrix, tol: Tolerance) -> HermitianEigen:
    g = identity(t.n) + t.H @ t
    return hermitian_eigen((g + g.H) * 0.5, tol)


def c_transform(t: QMatrix, tol: Tolerance | None = None) -> QMatrix:
    """C_T = (I + T*T)^-1."""
    eig = _gram(t, resolve(tol))
    return synthesize(eig, 1.0 / eig.values)


def z_transform(t: QMatrix, tol: Tolerance | None = None) -> TransformPair:
    """Z_T = T C_T^(1/2), with C_T and C_T^(1/2) taken from one eigendecomposition of I + T*T."""
    eig = _gram(t, resolve(tol))
    c = synthesize(eig, 1.0 / eig.values)
    root = synthesize(eig, 1.0 / np.sqrt(eig.values))
    return TransformPair(t, c, root, t @ root, eig)


def transform_identities_check(pair: TransformPair, tol: Tolerance | None = None) -> CheckReport:
    """C = I - Z*Z, ||Z|| <= 1, (Z_T)* = Z_{T*}, and Z normal when T is."""
    tol = resolve(tol)
    z = pair.Z
    z_tol = _z_tolerance(tol, pair.T.norm())
    report = CheckReport("transform")
    report.residual_below("c_identity", (pair.C - (identity(z.n) - z.H @ z)).norm(), tol.threshold(1.0))
    report.residual_below("norm_bound", max(0.0, z.norm() - 1.0), tol.threshold(1.0))
    adjoint = z_transform(pair.T.H, tol).Z
    report.residual_below("adjoint_identity", (z.H - adjoint).norm(), tol.threshold(1.0))
    if classify(pair.T, tol).normal:
        report.residual_below("normal_preserved", normality_residual(z), z_tol.threshold(1.0))
    return report


def phi(p: Quaternion) -> Quaternion:
    """p (1 - |p|^2)^(-1/2) on the open unit ball."""
    gap = 1.0 - p.norm() ** 2
    if gap <= 0.0:
        raise QuaternionDomainError(f"phi needs |p| < 1, got |p| = {p.norm():.17g}.")
    return p * (1.0 / math.sqrt(gap))


def psi(q: Quaternion) -> Quaternion:
    """q (1 + |q|^2)^(-1/2); the inverse of phi."""
    return q * (1.0 / math.sqrt(1.0 + q.norm() ** 2))


def _rayleigh_gap(eig: HermitianEigen, vectors: Iterable[np.ndarray]) -> float:
    """Mean of <C y, y> / <y, y> over the vectors, as sum |<y, v_k>|^2 / lambda_k."""
    values = []
    for y in vectors:
        weights = np.array([np.sum(qinner(y, eig.vector(k)) ** 2) for k in range(len(eig.values))])
        values.append(float(np.sum(weights / eig.values) / max(np.sum(weights), np.finfo(float).tiny)))
    return float(np.mean(values))


def _roundtrip_limit(norm_t: float) -> float:
    rtol = ROUNDTRIP_RTOL if norm_t <= RELAXED_NORM else RELAXED_RTOL
    return rtol * max(1.0, norm_t)


def recover_T_detailed(
    pair: TransformPair,
    j: ImaginaryUnit | None = None,
    tol: Tolerance | None = None,
) -> Recovery:
    """
    T = int phi(p) dF(p) with F the spectral measure of Z_T.

    phi is applied through the unbounded calculus (atoms on the unit sphere must carry no
    mass), and the pushforward E = F o phi^-1 is rebuilt as a cross-check. 1 - |p|^2 comes
    from the eigendata of I + T*T when the pair carries it.
    """
    j = j or default_unit()
    tol = resolve(tol)
    norm_t = pair.T.norm()
    residual = normality_residual(pair.T)
    if residual > tol.threshold(norm_t * norm_t):
        raise NotNormalError(f"recover_T needs a normal matrix (||TT* - T*T|| = {residual:.3e}).")

    measure = spectral_measure(pair.Z, j, _z_tolerance(tol, norm_t))
    gaps: list[float] = []
    values: list[complex] = []
    for k, atom in enumerate(measure.atoms):
        p = atom.p
        if pair.gram is not None and not atom.is_null:
            gap = _rayleigh_gap(pair.gram, atom.vectors)
        else:
            gap = 1.0 - p.norm() ** 2
        if gap <= 0.0:
            if not atom.is_null:
                raise InconsistentMeasureError(f"Atom {k} at |p| = {p.norm():.17g} lies on the unit sphere but has mass.")
            values.append(INFINITY)
        else:
            values.append(complex(p.re, p.abs_im) / math.sqrt(gap))
        gaps.append(gap)

    result = calc_binf(measure, BInftyFunction(tuple(values), name="phi"), tol)
    pushed = pushforward_values(measure, values)
    limit = _roundtrip_limit(norm_t)
    checks = CheckReport("recover_T")
    checks.extend(result.checks)
    checks.flag("full_domain", result.full_domain)
    checks.residual_below("roundtrip", (result.operator - pair.T).norm(), limit)
    checks.residual_below("pushforward_reconstruct", (reconstruct(pushed) - result.operator).norm(), limit)

    recovery = Recovery(result.operator, measure, pushed, tuple(gaps), checks)
    if recovery.min_gap < 1e-12:
        logger.warning("recover_T: 1 - |p|^2 down to %.3e, recovery is poorly conditioned", recovery.min_gap)
    logger.info("recover_T: n=%d, %d atoms, min gap %.3e", pair.T.n, len(measure.atoms), recovery.min_gap)
    return recovery


def recover_T(pair: TransformPair, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> QMatrix:
    return recover_T_detailed(pair, j, tol).T


def recover_T_direct(pair: TransformPair) -> QMatrix:
    """phi(Z_T) = Z_T (C_T^(1/2))^-1, formed literally."""
    return pair.Z @ inverse_matrix(pair.Zroot)


def unbounded_model(
    spheres: Iterable[tuple[Quaternion, int]],
    j: ImaginaryUnit | None = None,
    rng: np.random.Generator | None = None,
) -> QMatrix:
    """Normal matrix U diag(reps) U* with the given spheres and multiplicities, U random unitary."""
    j = j or default_unit()
    rng = rng or np.random.default_rng(int(getattr(settings, "QSPEC_SEED", 42)))
    values: list[Quaternion] = []
    for rep, multiplicity in spheres:
        z = quaternion_to_slice(rep, j)
        if z.imag < 0.0:
            raise QuaternionDomainError(f"{rep} is not in the upper half of the slice.")
        if int(multiplicity) < 1:
            raise DimensionMismatchError(f"Multiplicity must be at least 1, got {multiplicity}.")
        values.extend([rep] * int(multiplicity))
    if not values:
        raise DimensionMismatchError("unbounded_model needs at least one sphere.")
    return conjugate_diagonal(values, random_unitary(len(values), rng))


def corollary_forms_check(t: QMatrix, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> CheckReport:
    """
    Integral forms for the three normal classes:

        self-adjoint       T = int t dE(t),          atoms real
        anti-self-adjoint  T = int j t dE(t),        atoms j t with t >= 0
        unitary            T = int e^(j t) dE(t),    atoms e^(j t) with t in [0, pi]
    """
    tol = resolve(tol)
    flags = classify(t, tol)
    measure = spectral_measure(t, j, tol)
    live = [measure.atoms[k].p for k in measure.live_atoms]
    scale = max(1.0, t.norm())
    limit = tol.threshold(scale)
    report = CheckReport("corollary_forms")
    report.residual_below("reconstruct", (reconstruct(measure) - t).norm(), limit)

    applied = []
    if flags.hermitian:
        applied.append("hermitian")
        report.residual_below("real_atoms", max([p.abs_im for p in live] + [0.0]), limit)
        form = integrate(measure, [Quaternion(p.re) for p in measure.points])
        report.residual_below("hermitian_form", (form - t).norm(), limit)
    if flags.anti_hermitian:
        applied.append("anti_hermitian")
        report.residual_below("imaginary_atoms", max([abs(p.re) for p in live] + [0.0]), limit)
        form = integrate(measure, [measure.j * p.abs_im for p in measure.points])
        report.residual_below("anti_hermitian_form", (form - t).norm(), limit)
    if flags.unitary:
        applied.append("unitary")
        report.residual_below("unit_atoms", max([abs(p.norm() - 1.0) for p in live] + [0.0]), tol.threshold(1.0))
        angles = [math.atan2(p.abs_im, p.re) for p in measure.points]
        form = integrate(measure, [exp_slice(measure.j * angle) for angle in angles])
        report.residual_below("unitary_form", (form - t).norm(), tol.threshold(1.0))
    report.flag("normal_class", bool(applied), ",".join(applied) or "none")
    return report


def transform_report(t: QMatrix, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> dict[str, Any]:
    """Norms, identity residuals and, for normal T, the roundtrip through the measure of Z_T."""
    tol = resolve(tol)
    pair = z_transform(t, tol)
    identities = transform_identities_check(pair, tol)
    out: dict[str, Any] = {
        "norm_T": t.norm(),
        "norm_Z": pair.Z.norm(),
        "c_identity_residual": identities.worst("c_identity"),
        "adjoint_identity_residual": identities.worst("adjoint_identity"),
        "roundtrip_residual": None,
        "min_gap_1_minus_p2": None,
        "checks": identities.as_dict(),
        "Z": dump_matrix(pair.Z),
    }
    if classify(t, tol).normal:
        recovery = recover_T_detailed(pair, j, tol)
        out["roundtrip_residual"] = recovery.checks.worst("roundtrip")
        out["min_gap_1_minus_p2"] = recovery.min_gap
        out["recovery_checks"] = recovery.checks.as_dict()
        if t.norm() <= DIRECT_ROUTE_MAX_NORM:
            out["direct_route_residual"] = (recover_T_direct(pair) - recovery.T).norm()
    return out
