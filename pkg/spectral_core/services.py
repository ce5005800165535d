from __future__ import annotations

import logging
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from core.checks import CheckReport
from core.exceptions import InconsistentMeasureError, NotNormalError
from core.tolerances import Tolerance, grouping_tolerance, resolve
from qmatrix.array_utils import (
    chi,
    complex_to_vec,
    normalize_phase,
    qadjoint,
    qinner,
    qmatmul,
    qmatvec,
    qouter,
    qvector_norm,
)
from qmatrix.eigen_utils import jacobi_hermitian
from qmatrix.models import QMatrix
from qmatrix.services import hermitian_eigen, identity, normality_residual, synthesize
from quaternion_core.array_utils import as_qarray, qmul, qreal
from quaternion_core.constants import UNIT_VECTORS
from quaternion_core.models import ImaginaryUnit, Quaternion
from quaternion_core.services import align_unit, default_unit, parse_unit
from s_spectrum.services import s_spectrum

from .models import AtomicMeasure, Atom, DecompositionABJ, HilbertBasisNj, SpectralMeasure

logger = logging.getLogger(__name__)

ONE = np.array([1.0, 0.0, 0.0, 0.0])
E1, E2, E3 = (np.array(UNIT_VECTORS[k]) for k in ("e1", "e2", "e3"))

AXIOMS = (
    "norm_at_most_one",
    "empty_and_full",
    "additive",
    "multiplicative",
    "self_adjoint",
    "idempotent",
    "commutes_with_f_T",
    "projections_commute",
)


def _require_normal(t: QMatrix, tol: Tolerance) -> None:
    norm_t = t.norm()
    residual = normality_residual(t)
    if residual > tol.threshold(norm_t * norm_t):
        raise NotNormalError(f"Matrix is not normal (||TT* - T*T|| = {residual:.3e}).")


def _columns(vectors: Sequence[np.ndarray]) -> np.ndarray:
    return np.stack([as_qarray(v) for v in vectors], axis=1)


def decompose_TABJ(t: QMatrix, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> DecompositionABJ:
    """
    Split a normal T into A = (T + T*)/2, B = |T - T*|/2 and J.

    On the range of D = T - T*, J = D |D|^-1. On Ker D the factor is free; it is set to
    left multiplication by j in an eigenbasis of A compressed to the kernel.
    """
    j = j or default_unit()
    tol = resolve(tol)
    _require_normal(t, tol)
    n = t.n
    a = (t + t.H) * 0.5
    d = t - t.H
    gram = d.H @ d
    eig = hermitian_eigen((gram + gram.H) * 0.5, tol)
    sigma = np.sqrt(np.clip(eig.values, 0.0, None))
    b = synthesize(eig, 0.5 * sigma)

    cutoff = 2.0 * grouping_tolerance(t.norm())
    j_data = np.zeros((n, n, 4))
    kernel: list[np.ndarray] = []
    for k, s in enumerate(sigma):
        v = eig.vector(k)
        if s > cutoff:
            j_data = j_data + qouter(d @ v / s, ONE, v)
        else:
            kernel.append(v)

    kernel_basis: tuple[np.ndarray, ...] = ()
    if kernel:
        k_mat = _columns(kernel)
        compressed = QMatrix(qmatmul(qadjoint(k_mat), qmatmul(a.data, k_mat)))
        inner_eig = hermitian_eigen((compressed + compressed.H) * 0.5, tol)
        z_mat = qmatmul(k_mat, inner_eig.vectors.data)
        kernel_basis = tuple(z_mat[:, c, :].copy() for c in range(z_mat.shape[1]))
        for z in kernel_basis:
            j_data = j_data + qouter(z, j.as_array())

    logger.debug("decompose_TABJ: n=%d, kernel dimension %d", n, len(kernel_basis))
    return DecompositionABJ(a, b, QMatrix(j_data), j, kernel_basis)


def check_decomposition(t: QMatrix, dec: DecompositionABJ, tol: Tolerance | None = None) -> CheckReport:
    tol = resolve(tol)
    norm_t = max(1.0, t.norm())
    ident = identity(t.n)
    a, b, jop = dec.A, dec.B, dec.J
    report = CheckReport("decomposition")
    report.residual_below("T_eq_A_plus_JB", (t - (a + jop @ b)).norm(), tol.threshold(norm_t))
    report.residual_below("A_self_adjoint", (a - a.H).norm(), tol.threshold(norm_t))
    report.residual_below("B_self_adjoint", (b - b.H).norm(), tol.threshold(norm_t))
    min_b = float(hermitian_eigen((b + b.H) * 0.5, tol).values[0]) if t.n else 0.0
    report.residual_below("B_positive", max(0.0, -min_b), tol.threshold(norm_t))
    report.residual_below("J_anti_self_adjoint", (jop + jop.H).norm(), tol.threshold(1.0))
    report.residual_below("J_unitary", (jop.H @ jop - ident).norm(), tol.threshold(1.0))
    commutators = max((x @ y - y @ x).norm() for x, y in ((a, b), (a, jop), (b, jop)))
    report.residual_below("ABJ_commute", commutators, tol.threshold(norm_t))
    return report


def build_basis_Nj(jop: QMatrix, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> HilbertBasisNj:
    """
    Orthonormal y_k with J y_k = y_k j, so that J is left multiplication by j in this basis.

    The +1 eigenvectors of -i chi(J) give J x = x e1; each is fixed in phase and then
    turned into the slice of j by x -> x a with a^-1 e1 a = j.
    """
    j = j or default_unit()
    tol = resolve(tol)
    n = jop.n
    limit = tol.threshold(max(1, n))
    anti = (jop + jop.H).norm()
    unit = (jop.H @ jop - identity(n)).norm()
    if anti > limit or unit > limit:
        raise NotNormalError(
            f"J must be anti-self-adjoint and unitary (residuals {anti:.3e}, {unit:.3e})."
        )
    if n == 0:
        return HilbertBasisNj((), j)
    k = -1j * chi(jop.data)
    w, u = jacobi_hermitian(0.5 * (k + k.conj().T))
    plus = [u[:, idx] for idx in range(2 * n) if w[idx] > 0.0]
    if len(plus) != n:
        raise NotNormalError(f"J has {len(plus)} eigenvectors for +i, expected {n}.")
    rotate = align_unit(parse_unit("e1"), j).as_array()
    vectors = tuple(qmul(complex_to_vec(normalize_phase(p)), rotate) for p in plus)
    return HilbertBasisNj(vectors, j)


def left_scalar_multiplication(basis: HilbertBasisNj, p: Quaternion) -> QMatrix:
    return basis.left_scalar(p)


def spectral_measure(t: QMatrix, j: ImaginaryUnit | None = None, tol: Tolerance | None = None) -> SpectralMeasure:
    """
    Atomic spectral measure of a normal T on sigma_S(T) cap C_j^+.

    Each sphere contributes one atom. Its eigenvectors X (T X = X p) are rotated by a basis
    of J compressed to span X, which keeps T y = y p and makes J y = y j.
    """
    j = j or default_unit()
    tol = resolve(tol)
    spectrum = s_spectrum(t, j, tol)
    if not spectrum.normal:
        raise NotNormalError("The spectral measure needs a normal matrix.")
    dec = decompose_TABJ(t, j, tol)
    n = t.n
    atoms: list[Atom] = []
    for sphere in spectrum.spheres:
        x = _columns(sphere.vectors)
        compressed = QMatrix(qmatmul(qadjoint(x), qmatmul(dec.J.data, x)))
        z = build_basis_Nj((compressed - compressed.H) * 0.5, j, tol)
        ys = tuple(qmatvec(x, zv) for zv in z.vectors)
        projection = np.zeros((n, n, 4))
        for y in ys:
            projection = projection + qouter(y, ONE)
        atoms.append(Atom(sphere.rep, QMatrix(projection), ys))
    measure = SpectralMeasure(tuple(atoms), j, n)
    logger.info("spectral_measure: n=%d, %d atoms", n, len(atoms))
    return measure


def integrate(measure: SpectralMeasure, values: Sequence[Quaternion]) -> QMatrix:
    """sum_k f(p_k) dE in basis form: x -> sum over y in atom k of y f(p_k) <x, y>."""
    if len(values) != len(measure.atoms):
        raise InconsistentMeasureError(f"{len(values)} values for {len(measure.atoms)} atoms.")
    total = np.zeros((measure.n, measure.n, 4))
    for atom, value in zip(measure.atoms, values):
        for y in atom.vectors:
            total = total + qouter(y, value.as_array())
    return QMatrix(total)


def reconstruct(measure: SpectralMeasure) -> QMatrix:
    """T = sum_k p_k E({p_k}) with p_k acting by left multiplication in N_j."""
    basis = measure.basis
    if basis.n != measure.n:
        raise InconsistentMeasureError(f"Basis has {basis.n} vectors for dimension {measure.n}.")
    if any(y.shape != (measure.n, 4) for y in basis.vectors):
        raise InconsistentMeasureError("Basis vectors do not match the measure dimension.")
    return integrate(measure, measure.points)


def quadratic_form(t: QMatrix) -> Callable[[np.ndarray], np.ndarray]:
    """z -> <T z, z>."""
    return lambda z: qinner(t @ as_qarray(z), as_qarray(z))


def _value(q) -> np.ndarray:
    return q.as_array() if isinstance(q, Quaternion) else as_qarray(q)


def polarization(form: Callable[[np.ndarray], object], x, y) -> Quaternion:
    """
    <T x, y> from the eight values of z -> <T z, z>:

    4<Tx,y> = F(x+y) - F(x-y) + e1 F(x+ye1) - e1 F(x-ye1) + e1 F(x-ye2) e3
              - e1 F(x+ye2) e3 + F(x+ye3) e3 - F(x-ye3) e3
    """
    x, y = as_qarray(x), as_qarray(y)

    def f(q: np.ndarray, sign: float) -> np.ndarray:
        return _value(form(x + sign * qmul(y, q)))

    total = (
        f(ONE, 1.0)
        - f(ONE, -1.0)
        + qmul(E1, f(E1, 1.0))
        - qmul(E1, f(E1, -1.0))
        + qmul(qmul(E1, f(E2, -1.0)), E3)
        - qmul(qmul(E1, f(E2, 1.0)), E3)
        + qmul(f(E3, 1.0), E3)
        - qmul(f(E3, -1.0), E3)
    )
    return Quaternion.from_array(total / 4.0)


def measure_mu_xy(measure: SpectralMeasure, x, y) -> AtomicMeasure:
    """mu_{x,y}({p_k}) = <E({p_k}) x, y>."""
    x, y = as_qarray(x), as_qarray(y)
    masses = tuple(Quaternion.from_array(qinner(atom.projection @ x, y)) for atom in measure.atoms)
    return AtomicMeasure(tuple(measure.points), masses)


def mu_polarization(measure: SpectralMeasure, x, y) -> AtomicMeasure:
    """mu_{x,y} rebuilt atomwise from the positive measures mu_z(sigma) = <E(sigma) z, z>."""
    masses = tuple(polarization(quadratic_form(atom.projection), x, y) for atom in measure.atoms)
    return AtomicMeasure(tuple(measure.points), masses)


def _scaled(x: np.ndarray, q: Quaternion) -> np.ndarray:
    return qmul(x, q.as_array())


def check_mu_properties(
    measure: SpectralMeasure,
    x,
    y,
    z,
    alpha: Quaternion,
    beta: Quaternion,
    tol: Tolerance | None = None,
) -> CheckReport:
    """Sesquilinearity, the total-mass bound, conjugate symmetry and polarization of mu_{x,y}."""
    tol = resolve(tol)
    x, y, z = as_qarray(x), as_qarray(y), as_qarray(z)
    scale = max(1.0, qvector_norm(x), qvector_norm(y), qvector_norm(z)) ** 2 * max(1.0, alpha.norm(), beta.norm())

    def mu(a: np.ndarray, b: np.ndarray) -> AtomicMeasure:
        return measure_mu_xy(measure, a, b)

    report = CheckReport("mu")

    lhs = mu(_scaled(x, alpha) + _scaled(y, beta), z)
    rhs = [m1 * alpha + m2 * beta for m1, m2 in zip(mu(x, z).masses, mu(y, z).masses)]
    report.residual_below(
        "right_linear",
        max([(a - b).norm() for a, b in zip(lhs.masses, rhs)] + [0.0]),
        tol.threshold(scale),
    )

    lhs = mu(x, _scaled(y, alpha) + _scaled(z, beta))
    rhs = [alpha.conj() * m1 + beta.conj() * m2 for m1, m2 in zip(mu(x, y).masses, mu(x, z).masses)]
    report.residual_below(
        "conjugate_linear",
        max([(a - b).norm() for a, b in zip(lhs.masses, rhs)] + [0.0]),
        tol.threshold(scale),
    )

    bound = qvector_norm(x) * qvector_norm(y)
    report.residual_below("total_mass_bound", mu(x, y).total().norm() - bound, tol.threshold(max(1.0, bound)))
    report.residual_below("conjugate_symmetry", mu(x, y).conj().distance(mu(y, x)), tol.threshold(scale))
    report.residual_below("polarization", mu_polarization(measure, x, y).distance(mu(x, y)), tol.threshold(scale))
    return report


def _random_union(rng: np.random.Generator, size: int) -> list[int]:
    return [k for k in range(size) if rng.random() < 0.5]


def _random_slice_values(rng: np.random.Generator, measure: SpectralMeasure) -> list[Quaternion]:
    return [Quaternion(float(rng.standard_normal())) + measure.j * float(rng.standard_normal()) for _ in measure.atoms]


def verify_measure_axioms(
    measure: SpectralMeasure,
    samples: int = 5,
    rng: np.random.Generator | None = None,
    tol: Tolerance | None = None,
) -> CheckReport:
    """
    Check the eight spectral-measure properties on every atom pair and on random unions;
    commutation with f(T) uses random C_j-valued functions on the atoms.
    """
    tol = resolve(tol)
    rng = rng or np.random.default_rng(0)
    size = len(measure.atoms)
    ident = identity(measure.n)
    limit = tol.threshold(1.0)

    sets: list[list[int]] = [[k] for k in range(size)]
    sets += [_random_union(rng, size) for _ in range(samples)]
    pairs: list[tuple[list[int], list[int]]] = [([a], [b]) for a, b in combinations(range(size), 2)]
    pairs += [(_random_union(rng, size), _random_union(rng, size)) for _ in range(samples)]
    functions = [integrate(measure, _random_slice_values(rng, measure)) for _ in range(5)]

    worst = dict.fromkeys(AXIOMS, 0.0)
    f_scale = max([f.norm() for f in functions] + [1.0])
    worst["empty_and_full"] = max(measure.projection_of([]).norm(), (measure.projection_of(range(size)) - ident).norm())
    for sigma in sets:
        e = measure.projection_of(sigma)
        worst["norm_at_most_one"] = max(worst["norm_at_most_one"], e.norm() - 1.0)
        worst["self_adjoint"] = max(worst["self_adjoint"], (e - e.H).norm())
        worst["idempotent"] = max(worst["idempotent"], (e @ e - e).norm())
        for f in functions:
            worst["commutes_with_f_T"] = max(worst["commutes_with_f_T"], (e @ f - f @ e).norm() / f_scale)
    for sigma, tau in pairs:
        e_s, e_t = measure.projection_of(sigma), measure.projection_of(tau)
        inter = measure.projection_of(set(sigma) & set(tau))
        worst["multiplicative"] = max(worst["multiplicative"], (inter - e_s @ e_t).norm())
        worst["projections_commute"] = max(worst["projections_commute"], (e_s @ e_t - e_t @ e_s).norm())
        only_t = sorted(set(tau) - set(sigma))
        disjoint_union = measure.projection_of(set(sigma) | set(only_t))
        worst["additive"] = max(
            worst["additive"],
            (disjoint_union - (e_s + measure.projection_of(only_t))).norm(),
        )

    report = CheckReport("measure_axioms")
    for name, residual in worst.items():
        report.residual_below(name, residual, limit)
    logger.info("verify_measure_axioms: %d atoms, passed=%s", size, report.passed)
    return report


def commutant_check(
    t: QMatrix,
    w: QMatrix,
    j: ImaginaryUnit | None = None,
    tol: Tolerance | None = None,
) -> tuple[bool, bool]:
    """
    (W commutes with A, B and J; W commutes with every E(sigma) and with L_j in N_j).

    Both sides are evaluated independently at threshold 1e-8 * ||W|| * max(1, ||T||).
    """
    tol = resolve(tol)
    dec = decompose_TABJ(t, j, tol)
    measure = spectral_measure(t, dec.j, tol)
    limit = 1e-8 * max(1.0, w.norm()) * max(1.0, t.norm())

    def bracket(x: QMatrix) -> float:
        return (w @ x - x @ w).norm()

    with_abj = max(bracket(dec.A), bracket(dec.B), bracket(dec.J)) <= limit
    with_e = max([bracket(a.projection) for a in measure.atoms] + [bracket(measure.basis.left_scalar(dec.j))]) <= limit
    return bool(with_abj), bool(with_e)


def polarization_family(n: int) -> list[np.ndarray]:
    """Vectors e_a + e_b q (q in 1, e1, e2, e3, both signs) that determine E through mu_{x,x}."""
    basis = [qreal(np.eye(n)[k]) for k in range(n)]
    family = list(basis)
    for a in range(n):
        for b in range(a + 1, n):
            for q in (ONE, E1, E2, E3):
                for sign in (1.0, -1.0):
                    family.append(basis[a] + sign * qmul(basis[b], q))
    return family


def measures_agree(
    first: SpectralMeasure,
    second: SpectralMeasure,
    vectors: Sequence[np.ndarray] | None = None,
    tol: Tolerance | None = None,
) -> CheckReport:
    """
    Compare two measures through mu_{x,x} on their atoms, then rebuild the projections of
    `second` from those values by polarization and compare them with `first`.
    """
    tol = resolve(tol)
    report = CheckReport("measures_agree")
    same_atoms = len(first.atoms) == len(second.atoms) and first.n == second.n
    report.flag("atom_count", same_atoms, f"{len(first.atoms)} vs {len(second.atoms)}")
    if not same_atoms:
        return report
    limit = tol.threshold(1.0)
    points = max([(a.p - b.p).norm() for a, b in zip(first.atoms, second.atoms)] + [0.0])
    report.residual_below("atom_points", points, tol.threshold(max([1.0] + [a.p.norm() for a in first.atoms])))

    vectors = polarization_family(first.n) if vectors is None else [as_qarray(v) for v in vectors]
    mu_gap = 0.0
    for x in vectors:
        mu_gap = max(mu_gap, measure_mu_xy(first, x, x).distance(measure_mu_xy(second, x, x)))
    report.residual_below("mu_xx", mu_gap, limit * max(1.0, max(qvector_norm(x) ** 2 for x in vectors)))

    n = first.n
    unit = [qreal(np.eye(n)[k]) for k in range(n)]
    rebuilt_gap = 0.0
    for atom_a, atom_b in zip(first.atoms, second.atoms):
        form = quadratic_form(atom_b.projection)
        for a in range(n):
            for b in range(n):
                entry = polarization(form, unit[a], unit[b])
                rebuilt_gap = max(rebuilt_gap, (entry - atom_a.projection.entry(b, a)).norm())
    report.residual_below("projections", rebuilt_gap, limit)
    return report
