from __future__ import annotations

import logging
import math
from typing import Callable, Sequence, Union

import numpy as np
from django.conf import settings
from numpy.polynomial import chebyshev as C

from core.checks import CheckReport
from core.exceptions import (
    ApproximationError,
    InconsistentMeasureError,
    InvalidSliceFunctionError,
    NotInvertibleError,
    NotPositiveError,
    UndefinedOnAtomError,
)
from core.tolerances import Tolerance, grouping_tolerance, resolve
from qmatrix.array_utils import chi, qinner, qvector_norm
from qmatrix.models import QMatrix
from qmatrix.services import chi_extract, classify, identity
from quaternion_core.array_utils import as_qarray, qmul
from quaternion_core.models import ImaginaryUnit, Quaternion
from quaternion_core.services import align_unit, default_unit, slice_split, slice_to_quaternion
from s_spectrum.services import s_spectrum
from spectral_core.models import Atom, SpectralMeasure
from spectral_core.services import decompose_TABJ, integrate, measure_mu_xy, spectral_measure

from . import chebyshev_utils
from .models import BInftyFunction, BInftyResult, SimpleFunction, SliceFunction, is_infinite

logger = logging.getLogger(__name__)

CalcFunction = Union[SliceFunction, SimpleFunction, BInftyFunction, Callable[[complex], complex]]


def eval_slice(f: SliceFunction, q: Quaternion, j: ImaginaryUnit | None = None) -> Quaternion:
    """f(u + iv) = alpha(u, v) + i beta(u, v) with q = u + iv, v >= 0."""
    j = j or default_unit()
    point = slice_split(q, j)
    f.check_symmetry(point.u, point.v)
    try:
        alpha = complex(f.alpha(point.u, point.v))
        beta = complex(f.beta(point.u, point.v))
    except (ZeroDivisionError, OverflowError) as exc:
        raise UndefinedOnAtomError(f"{f.name} is not defined at {q}.") from exc
    return slice_to_quaternion(alpha, j) + point.j * slice_to_quaternion(beta, j)


def _slice_point(p: Quaternion) -> complex:
    return complex(p.re, p.abs_im)


def atom_values(measure: SpectralMeasure, f: CalcFunction) -> list[complex]:
    """f on every atom as C_j numbers (complex), infinity where f blows up."""
    size = len(measure.atoms)
    if isinstance(f, SimpleFunction):
        return f.values(size)
    if isinstance(f, BInftyFunction):
        if len(f.values) != size:
            raise InvalidSliceFunctionError(f"{f.name} has {len(f.values)} values for {size} atoms.")
        return [complex(c) for c in f.values]
    if isinstance(f, SliceFunction):
        out = []
        for atom in measure.atoms:
            z = _slice_point(atom.p)
            f.check_symmetry(z.real, z.imag)
            out.append(f.on_slice(z))
        return out
    return BInftyFunction.from_callable([_slice_point(a.p) for a in measure.atoms], f).values


def _as_values(measure: SpectralMeasure, values: Sequence[complex]) -> list[Quaternion]:
    return [slice_to_quaternion(0j if is_infinite(c) else c, measure.j) for c in values]


def _finite_on_live_atoms(measure: SpectralMeasure, values: Sequence[complex], name: str) -> None:
    for k in measure.live_atoms:
        if is_infinite(values[k]):
            raise UndefinedOnAtomError(f"{name} is infinite on atom {k} at {measure.atoms[k].p}.")


def calc_continuous(measure: SpectralMeasure, f: CalcFunction) -> QMatrix:
    """f(T) = sum_k f(p_k) E({p_k}), f(p_k) acting by left multiplication in N_j."""
    values = atom_values(measure, f)
    _finite_on_live_atoms(measure, values, str(getattr(f, "name", f)))
    return integrate(measure, _as_values(measure, values))


def calc_simple(measure: SpectralMeasure, f: SimpleFunction) -> QMatrix:
    """f(T) = sum_n c_n E(sigma_n)."""
    return integrate(measure, _as_values(measure, f.values(len(measure.atoms))))


def calc_binf(measure: SpectralMeasure, f: BInftyFunction, tol: Tolerance | None = None) -> BInftyResult:
    """
    f(T) for atomwise f that may be infinite.

    The bounding sets sigma_n = {|f| <= n} grow until they hold every finite atom, so the
    limit is (chi_sigma f)(T) for sigma the finite atoms; the domain is the range of E(sigma).
    """
    tol = resolve(tol)
    values = atom_values(measure, f)
    live = set(measure.live_atoms)
    finite = [k for k, c in enumerate(values) if not is_infinite(c)]
    infinite_live = tuple(k for k, c in enumerate(values) if is_infinite(c) and k in live)

    sequence: list[tuple[int, ...]] = []
    bound = 1
    while True:
        sigma = tuple(k for k in finite if abs(values[k]) <= bound)
        if not sequence or sigma != sequence[-1]:
            sequence.append(sigma)
        if len(sigma) == len(finite):
            break
        bound *= 2

    truncated = [values[k] if k in finite else 0j for k in range(len(values))]
    operator = integrate(measure, _as_values(measure, truncated))
    domain = measure.projection_of(finite)

    checks = CheckReport("binf")
    scale = max([1.0] + [abs(values[k]) for k in finite])
    worst = 0.0
    for sigma in sequence:
        e = measure.projection_of(sigma)
        worst = max(worst, (e @ operator @ domain - operator @ e @ domain).norm())
    checks.residual_below("containment", worst, tol.threshold(scale))
    checks.residual_below(
        "bounding_union",
        (measure.projection_of(sequence[-1]) - domain).norm(),
        tol.threshold(1.0),
    )
    if infinite_live:
        logger.info("calc_binf: %s is infinite on atoms %s; domain is proper", f.name, list(infinite_live))
    return BInftyResult(operator, domain, infinite_live, tuple(sequence), checks)


def invert_calc(measure: SpectralMeasure, f: CalcFunction, tol: Tolerance | None = None) -> QMatrix:
    """(1/f)(T) with 1/0 = inf and 1/inf = 0; f must not vanish on a live atom."""
    tol = resolve(tol)
    values = atom_values(measure, f)
    scale = max([1.0] + [abs(c) for c in values if not is_infinite(c)])
    inverse: list[complex] = []
    for k, c in enumerate(values):
        if is_infinite(c):
            inverse.append(0j)
        elif abs(c) <= tol.threshold(scale):
            if k in measure.live_atoms:
                raise NotInvertibleError(f"{getattr(f, 'name', f)} vanishes on atom {k} at {measure.atoms[k].p}.")
            inverse.append(0j)
        else:
            inverse.append(1.0 / c)
    return integrate(measure, _as_values(measure, inverse))


def _callable(f: CalcFunction) -> Callable[[complex], complex]:
    if isinstance(f, SliceFunction):
        return f.on_slice
    return f


def pushforward(measure: SpectralMeasure, g: CalcFunction) -> SpectralMeasure:
    """
    E~(sigma) = E(g^-1(sigma)).

    Images below the real axis are moved to C_j^+ by conjugation, their vectors turned by
    a unit a with a^-1 (-j) a = j. Atoms with equal images merge.
    """
    func = _callable(g)
    return pushforward_values(measure, [complex(func(_slice_point(a.p))) for a in measure.atoms])


def pushforward_values(measure: SpectralMeasure, images: Sequence[complex]) -> SpectralMeasure:
    """Pushforward by the map sending atom k to images[k]; null atoms sent to infinity are dropped."""
    if len(images) != len(measure.atoms):
        raise InconsistentMeasureError(f"{len(images)} images for {len(measure.atoms)} atoms.")
    _finite_on_live_atoms(measure, images, "pushforward map")
    j = measure.j
    flip = align_unit(ImaginaryUnit(*(-j).as_list()), j).as_array()
    kept = [(atom, complex(w)) for atom, w in zip(measure.atoms, images) if not is_infinite(w)]
    images = [w for _, w in kept]
    gap = grouping_tolerance(max([1.0] + [abs(w) for w in images]))

    merged: list[tuple[complex, np.ndarray, list[np.ndarray]]] = []
    for atom, w in kept:
        vectors = list(atom.vectors)
        if w.imag < -gap:
            w = w.conjugate()
            vectors = [qmul(y, flip) for y in vectors]
        if abs(w.imag) < gap:
            w = complex(w.real, 0.0)
        for k, (point, projection, members) in enumerate(merged):
            if abs(point - w) <= gap:
                merged[k] = (point, projection + atom.projection.data, members + vectors)
                break
        else:
            merged.append((w, atom.projection.data.copy(), vectors))

    merged.sort(key=lambda item: (item[0].real, item[0].imag))
    atoms = tuple(
        Atom(slice_to_quaternion(point, j), QMatrix(projection), tuple(members))
        for point, projection, members in merged
    )
    return SpectralMeasure(atoms, j, measure.n)


def change_of_variables_check(measure: SpectralMeasure, g: CalcFunction, h: CalcFunction) -> float:
    """||calc(E~, h) - calc(E, h o g)|| with E~ the pushforward of E by g."""
    pushed = pushforward(measure, g)
    outer, inner = _callable(h), _callable(g)
    def composed(z: complex) -> complex:
        return outer(inner(z))

    return (calc_continuous(pushed, h) - calc_continuous(measure, composed)).norm()


def _representative(value: complex) -> tuple[float, float]:
    return (value.real, abs(value.imag))


def spectral_mapping_check(
    t: QMatrix,
    f: CalcFunction,
    j: ImaginaryUnit | None = None,
    tol: Tolerance | None = None,
) -> CheckReport:
    """Spheres of f(T) against the spheres of f(p_k), as multisets."""
    tol = resolve(tol)
    measure = spectral_measure(t, j, tol)
    values = atom_values(measure, f)
    _finite_on_live_atoms(measure, values, str(getattr(f, "name", f)))
    image = integrate(measure, _as_values(measure, values))
    gap = grouping_tolerance(max([1.0] + [abs(c) for c in values]))

    expected: list[list[float]] = []
    for atom, c in zip(measure.atoms, values):
        if atom.is_null:
            continue
        u, v = _representative(c)
        for entry in expected:
            if abs(entry[0] - u) <= gap and abs(entry[1] - v) <= gap:
                entry[2] += atom.multiplicity
                break
        else:
            expected.append([u, v, atom.multiplicity])
    expected.sort()

    spectrum = s_spectrum(image, measure.j, tol)
    found = [[s.u, s.v, s.multiplicity] for s in spectrum.spheres]
    report = CheckReport("spectral_mapping")
    report.flag("sphere_count", len(found) == len(expected), f"{len(found)} vs {len(expected)}")
    if len(found) == len(expected):
        distance = max([math.hypot(a[0] - b[0], a[1] - b[1]) for a, b in zip(found, expected)] + [0.0])
        report.residual_below("sphere_points", distance, 10.0 * gap)
        report.flag("multiplicities", all(a[2] == b[2] for a, b in zip(found, expected)))
    return report


def _parts(measure: SpectralMeasure, values: Sequence[complex]) -> tuple[QMatrix, QMatrix]:
    f0 = integrate(measure, [Quaternion(float(c.real)) for c in values])
    f1 = integrate(measure, [Quaternion(float(c.imag)) for c in values])
    return f0, f1


def check_isometry_and_selfadjoint_parts(
    t: QMatrix,
    f: CalcFunction,
    samples: int = 5,
    rng: np.random.Generator | None = None,
    j: ImaginaryUnit | None = None,
    tol: Tolerance | None = None,
) -> CheckReport:
    """||f(T)|| = sup |f| on the atoms, f0(T) and f1(T) self-adjoint, ||f(T)x||^2 = int |f|^2 dmu_x."""
    tol = resolve(tol)
    rng = rng or np.random.default_rng(0)
    measure = spectral_measure(t, j, tol)
    values = atom_values(measure, f)
    _finite_on_live_atoms(measure, values, str(getattr(f, "name", f)))
    image = integrate(measure, _as_values(measure, values))
    sup = max([abs(values[k]) for k in measure.live_atoms] + [0.0])

    report = CheckReport("isometry")
    report.residual_below("norm_equals_sup", abs(image.norm() - sup), tol.threshold(max(1.0, sup)))
    f0, f1 = _parts(measure, values)
    report.residual_below("f0_self_adjoint", (f0 - f0.H).norm(), tol.threshold(max(1.0, sup)))
    report.residual_below("f1_self_adjoint", (f1 - f1.H).norm(), tol.threshold(max(1.0, sup)))
    dec = decompose_TABJ(t, measure.j, tol)
    report.residual_below("f_eq_f0_plus_Jf1", (image - (f0 + dec.J @ f1)).norm(), tol.threshold(max(1.0, sup)))

    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal((t.n, 4))
        mu = measure_mu_xy(measure, x, x)
        expected = sum(abs(c) ** 2 * m.re for c, m, atom in zip(values, mu.masses, measure.atoms) if not atom.is_null)
        worst = max(worst, abs(qvector_norm(image @ x) ** 2 - expected) / max(1.0, qvector_norm(x) ** 2))
    report.residual_below("norm_identity", worst, tol.threshold(max(1.0, sup * sup)))
    return report


def homomorphism_check(
    measure: SpectralMeasure,
    f: CalcFunction,
    g: CalcFunction,
    tol: Tolerance | None = None,
) -> CheckReport:
    """Sum, product, adjoint, J-commutation and f(T)* f(T) = (conj(f) f)(T) on the atoms."""
    tol = resolve(tol)
    wf, wg = atom_values(measure, f), atom_values(measure, g)
    _finite_on_live_atoms(measure, wf, str(getattr(f, "name", f)))
    _finite_on_live_atoms(measure, wg, str(getattr(g, "name", g)))

    def calc(values: Sequence[complex]) -> QMatrix:
        return integrate(measure, _as_values(measure, values))

    ff, gg = calc(wf), calc(wg)
    scale = max([1.0] + [abs(c) for c in wf] + [abs(c) for c in wg]) ** 2
    limit = tol.threshold(scale)
    l_j = measure.basis.left_scalar(measure.j)
    report = CheckReport("homomorphism")
    report.residual_below("sum", (calc([a + b for a, b in zip(wf, wg)]) - (ff + gg)).norm(), limit)
    report.residual_below("product", (calc([a * b for a, b in zip(wf, wg)]) - ff @ gg).norm(), limit)
    report.residual_below("adjoint", (calc([a.conjugate() for a in wf]) - ff.H).norm(), limit)
    report.residual_below("J_commutes", (l_j @ ff - ff @ l_j).norm(), limit)
    report.residual_below("adjoint_product", (ff.H @ ff - calc([abs(a) ** 2 for a in wf])).norm(), limit)
    return report


def riesz_functional_check(
    measure: SpectralMeasure,
    g: CalcFunction,
    x,
    tol: Tolerance | None = None,
) -> CheckReport:
    """l_x(g) = <g(T)x, x> equals sum_k g(p_k) mu_{x,x}({p_k}) for real-valued g."""
    tol = resolve(tol)
    x = as_qarray(x)
    values = atom_values(measure, g)
    _finite_on_live_atoms(measure, values, str(getattr(g, "name", g)))
    scale = max([1.0] + [abs(c) for c in values]) * max(1.0, qvector_norm(x) ** 2)
    report = CheckReport("riesz_functional")
    imaginary = max([abs(c.imag) for c in values] + [0.0])
    report.residual_below("real_valued", imaginary, tol.threshold(scale))

    functional = Quaternion.from_array(qinner(calc_continuous(measure, g) @ x, x))
    mu = measure_mu_xy(measure, x, x)
    integral = sum((m * float(c.real) for c, m in zip(values, mu.masses)), Quaternion(0.0))
    report.residual_below("representation", (functional - integral).norm(), tol.threshold(scale))
    if all(c.real >= 0.0 for c in values):
        report.residual_below("positive", max(0.0, -functional.re), tol.threshold(scale))
    return report


def sqrt_via_calculus(t: QMatrix, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> QMatrix:
    """T^(1/2) = int t^(1/2) dE(t) for positive T."""
    tol = resolve(tol)
    if not classify(t, tol).positive:
        raise NotPositiveError("sqrt_via_calculus needs a positive matrix.")
    measure = spectral_measure(t, j, tol)
    return calc_continuous(measure, lambda z: math.sqrt(max(z.real, 0.0)))


def _degree_cap() -> int:
    return int(getattr(settings, "QSPEC_POLY_DEGREE_CAP", 256))


def calc_poly_approx(
    t: QMatrix,
    f: SliceFunction,
    eps: float = 1e-8,
    j: ImaginaryUnit | None = None,
    tol: Tolerance | None = None,
) -> QMatrix:
    """
    f(T) = f0(A, B) + J f1(A, B) with f0 = alpha, f1 = beta replaced by tensor Chebyshev
    interpolants on the box of atom coordinates (u, v).

    The degree doubles from 1 until |alpha + i beta - f| at the atoms is at most eps.
    When every atom has the same v the fit runs in u alone. If the cap is reached first,
    alpha and beta are interpolated exactly at the atoms along a line u + gamma v, which
    needs degree (#atoms - 1) and no more.
    """
    if not f.intrinsic:
        raise InvalidSliceFunctionError(f"{f.name} is not intrinsic; the polynomial route needs real alpha and beta.")
    j = j or default_unit()
    tol = resolve(tol)
    dec = decompose_TABJ(t, j, tol)
    spheres = s_spectrum(t, j, tol).spheres
    us = np.array([s.u for s in spheres])
    vs = np.array([s.v for s in spheres])
    for u, v in zip(us, vs):
        f.check_symmetry(float(u), float(v))
    box_u, box_v = chebyshev_utils.interval(us), chebyshev_utils.interval(vs)
    flat_v = bool(vs.size) and chebyshev_utils.is_degenerate(vs)

    def alpha(u: float, v: float) -> float:
        return float(np.real(f.alpha(u, v)))

    def beta(u: float, v: float) -> float:
        return float(np.real(f.beta(u, v)))

    def fit(func: Callable[[float, float], float], degree: int) -> np.ndarray:
        if flat_v:
            return chebyshev_utils.fit_line(func, box_u, box_v[0], degree)
        return chebyshev_utils.fit_tensor(func, box_u, box_v, degree)

    def miss(coef_a: np.ndarray, coef_b: np.ndarray) -> float:
        da = chebyshev_utils.evaluate_tensor(coef_a, box_u, box_v, us, vs) - target_a
        db = chebyshev_utils.evaluate_tensor(coef_b, box_u, box_v, us, vs) - target_b
        return float(np.max(np.hypot(da, db), initial=0.0))

    target_a = np.array([alpha(u, v) for u, v in zip(us, vs)])
    target_b = np.array([beta(u, v) for u, v in zip(us, vs)])

    n2 = 2 * t.n
    x = (chi(dec.A.data) - box_u[0] * np.eye(n2)) / box_u[1]
    y = (chi(dec.B.data) - box_v[0] * np.eye(n2)) / box_v[1]
    cap = _degree_cap()
    degree = 1
    while True:
        coef_a, coef_b = fit(alpha, degree), fit(beta, degree)
        error = miss(coef_a, coef_b)
        logger.debug("calc_poly_approx: degree %d, error %.3e", degree, error)
        if error <= eps:
            part0 = chebyshev_utils.evaluate_on_matrices(coef_a, x, y)
            part1 = chebyshev_utils.evaluate_on_matrices(coef_b, x, y)
            break
        if degree >= cap:
            part0, part1 = _interpolate_at_atoms(f, x, y, us, vs, box_u, box_v, target_a, target_b, eps, cap)
            break
        degree = min(2 * degree, cap)

    out = part0 + chi(dec.J.data) @ part1
    return chi_extract(out, Tolerance(atol=max(1e-8, 10.0 * eps), rtol=1e-6))


def _interpolate_at_atoms(
    f: SliceFunction,
    x: np.ndarray,
    y: np.ndarray,
    us: np.ndarray,
    vs: np.ndarray,
    box_u: tuple[float, float],
    box_v: tuple[float, float],
    target_a: np.ndarray,
    target_b: np.ndarray,
    eps: float,
    cap: int,
) -> tuple[np.ndarray, np.ndarray]:
    if len(us) - 1 > cap:
        raise ApproximationError(f"{f.name}: {len(us)} atoms need degree {len(us) - 1}, above the cap {cap}.")
    px, py = chebyshev_utils.to_unit(us, box_u), chebyshev_utils.to_unit(vs, box_v)
    gamma, box_w = chebyshev_utils.atom_line(px, py)
    w = chebyshev_utils.to_unit(px + gamma * py, box_w)
    coef_a = chebyshev_utils.interpolate_points(w, target_a)
    coef_b = chebyshev_utils.interpolate_points(w, target_b)
    error = float(np.max(np.hypot(C.chebval(w, coef_a) - target_a, C.chebval(w, coef_b) - target_b), initial=0.0))
    if error > eps:
        raise ApproximationError(f"{f.name}: error {error:.3e} above {eps:.3e} at degree cap {cap}.")
    logger.info("calc_poly_approx: %s interpolated at %d atoms along u %+g v", f.name, len(us), gamma)
    wm = (x + gamma * y - box_w[0] * np.eye(x.shape[0])) / box_w[1]
    return chebyshev_utils.evaluate_on_matrix(coef_a, wm), chebyshev_utils.evaluate_on_matrix(coef_b, wm)


def poly_approx_report(
    t: QMatrix,
    f: SliceFunction,
    eps_values: Sequence[float] = (1e-2, 1e-4, 1e-6),
    j: ImaginaryUnit | None = None,
    tol: Tolerance | None = None,
) -> CheckReport:
    """
    Cross-check the polynomial route against the atomic calculus at decreasing eps.

    Besides staying within 2 eps, each finer eps must at least halve the previous
    disagreement, unless that disagreement already met the finer eps (the coarser
    polynomial is then reused) or both sit at rounding level.
    """
    tol = resolve(tol)
    measure = spectral_measure(t, j, tol)
    exact = calc_continuous(measure, f)
    floor = tol.threshold(max(1.0, t.norm()))
    report = CheckReport("poly_approx")
    previous: float | None = None
    for eps in eps_values:
        gap = (calc_poly_approx(t, f, eps, measure.j, tol) - exact).norm()
        report.residual_below(f"eps={eps:g}", gap, eps * 2.0 + floor)
        if previous is not None:
            limit = previous + floor if previous <= eps + floor else max(0.5 * previous, floor)
            report.residual_below(f"halving:eps={eps:g}", gap, limit)
        previous = gap
    return report


def identity_check(measure: SpectralMeasure) -> float:
    """||1(T) - I||."""
    return (calc_continuous(measure, lambda z: 1.0) - identity(measure.n)).norm()
