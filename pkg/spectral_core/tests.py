import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import InconsistentMeasureError, NotNormalError
from qmatrix.models import QMatrix
from qmatrix.sampling import (
    conjugate_diagonal,
    random_matrix,
    random_normal,
    random_quaternion,
    random_unitary,
    random_vector,
    trial_generators,
)
from qmatrix.services import apply, diag, identity, zeros
from quaternion_core.array_utils import qmul, qreal
from quaternion_core.models import Quaternion
from quaternion_core.services import parse_unit

from .models import Atom, SpectralMeasure
from .services import (
    build_basis_Nj,
    check_decomposition,
    check_mu_properties,
    commutant_check,
    decompose_TABJ,
    left_scalar_multiplication,
    measure_mu_xy,
    measures_agree,
    mu_polarization,
    polarization,
    quadratic_form,
    reconstruct,
    spectral_measure,
    verify_measure_axioms,
)

E1 = Quaternion(0, 1, 0, 0)
E2 = Quaternion(0, 0, 1, 0)
J = parse_unit("e1")
HALF_ROOT = 1.0 / math.sqrt(2.0)


def vec_norm(x) -> float:
    return float(np.sqrt(np.sum(np.asarray(x) ** 2)))


class DecompositionTests(SimpleTestCase):
    def test_imaginary_unit(self):
        dec = decompose_TABJ(diag([E1]), J)
        self.assertTrue(dec.A.allclose(zeros(1), 1e-15))
        self.assertTrue(dec.B.allclose(identity(1), 1e-14))
        self.assertTrue(dec.J.allclose(diag([E1]), 1e-14))
        self.assertEqual(dec.kernel_flag, "none")

    def test_hermitian_uses_kernel_convention(self):
        t = diag([Quaternion(1.0), Quaternion(2.0)])
        dec = decompose_TABJ(t, J)
        self.assertTrue(dec.A.allclose(t, 1e-15))
        self.assertTrue(dec.B.allclose(zeros(2), 1e-14))
        self.assertEqual(dec.kernel_flag, "full")
        self.assertEqual(dec.kernel_dim, 2)
        self.assertTrue(check_decomposition(t, dec).passed)

    def test_random_normal(self):
        for rng in trial_generators(100, seed=11):
            n = int(rng.integers(1, 7))
            t = random_normal(n, rng)
            dec = decompose_TABJ(t, J)
            report = check_decomposition(t, dec)
            self.assertTrue(report.passed, report.as_dict())

    def test_mixed_kernel(self):
        rng = np.random.default_rng(12)
        t = conjugate_diagonal([Quaternion(0.5), Quaternion(1.0, 2.0, 0.0, 0.0), Quaternion(-1.0)], random_unitary(3, rng))
        dec = decompose_TABJ(t, J)
        self.assertEqual(dec.kernel_flag, "partial")
        self.assertEqual(dec.kernel_dim, 2)
        self.assertTrue(check_decomposition(t, dec).passed)

    def test_rejects_non_normal(self):
        t = QMatrix([[[1, 0, 0, 0], [1, 0, 0, 0]], [[0, 0, 0, 0], [2, 0, 0, 0]]])
        with self.assertRaises(NotNormalError):
            decompose_TABJ(t)


class BasisTests(SimpleTestCase):
    def test_e1(self):
        basis = build_basis_Nj(diag([E1]), J)
        np.testing.assert_allclose(basis.vectors[0], [[1.0, 0.0, 0.0, 0.0]], atol=1e-15)

    def test_e2(self):
        basis = build_basis_Nj(diag([E2]), J)
        np.testing.assert_allclose(basis.vectors[0], [[HALF_ROOT, 0.0, 0.0, HALF_ROOT]], atol=1e-15)

    def test_random_reconstructs_j(self):
        for rng in trial_generators(8, seed=13):
            n = int(rng.integers(1, 6))
            jop = conjugate_diagonal([E1] * n, random_unitary(n, rng))
            for unit in ("e1", "e3", "0.6,0.8,0"):
                j = parse_unit(unit)
                basis = build_basis_Nj(jop, j)
                self.assertTrue(left_scalar_multiplication(basis, j).allclose(jop, 1e-10))
                m = basis.matrix()
                self.assertTrue((m.H @ m).allclose(identity(n), 1e-12))
                for y in basis.vectors:
                    np.testing.assert_allclose(apply(jop, y), qmul(y, j.as_array()), atol=1e-12)

    def test_rejects_non_unitary(self):
        with self.assertRaises(NotNormalError):
            build_basis_Nj(diag([E1 * 2.0]), J)
        with self.assertRaises(NotNormalError):
            build_basis_Nj(identity(2), J)


class SpectralMeasureTests(SimpleTestCase):
    def test_diagonal(self):
        measure = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J)
        self.assertEqual([a.p for a in measure.atoms], [Quaternion(1.0), Quaternion(2.0)])
        self.assertTrue(measure.atoms[0].projection.allclose(diag([Quaternion(1.0), Quaternion(0.0)]), 1e-15))
        self.assertTrue(measure.atoms[1].projection.allclose(diag([Quaternion(0.0), Quaternion(1.0)]), 1e-15))
        self.assertTrue(measure.basis.matrix().allclose(identity(2), 1e-15))

    def test_rotated_basis(self):
        measure = spectral_measure(diag([E2]), J)
        self.assertEqual(len(measure.atoms), 1)
        self.assertLessEqual((measure.atoms[0].p - E1).norm(), 1e-14)
        self.assertTrue(measure.atoms[0].projection.allclose(identity(1), 1e-14))
        np.testing.assert_allclose(measure.basis.vectors[0], [[HALF_ROOT, 0.0, 0.0, HALF_ROOT]], atol=1e-14)
        self.assertTrue(reconstruct(measure).allclose(diag([E2]), 1e-14))

    def test_roundtrip_and_basis(self):
        for rng in trial_generators(100, seed=14):
            n = int(rng.integers(1, 9))
            t = random_normal(n, rng)
            measure = spectral_measure(t, J)
            scale = max(1.0, t.norm())
            self.assertLessEqual((reconstruct(measure) - t).norm(), 1e-10 * scale)
            self.assertEqual(measure.basis.n, n)
            for atom in measure.atoms:
                self.assertGreaterEqual(atom.p.s1, 0.0)
                for y in atom.vectors:
                    residual = apply(t, y) - qmul(y, atom.p.as_array())
                    self.assertLessEqual(vec_norm(residual), 1e-10 * scale)
            dec = decompose_TABJ(t, J)
            self.assertTrue(left_scalar_multiplication(measure.basis, J).allclose(dec.J, 1e-9))

    def test_other_slice(self):
        j = parse_unit("e2")
        t = random_normal(4, np.random.default_rng(15))
        measure = spectral_measure(t, j)
        for atom in measure.atoms:
            self.assertLessEqual(abs(atom.p.s1) + abs(atom.p.s3), 1e-12)
            self.assertGreaterEqual(atom.p.s2, 0.0)
        self.assertLessEqual((reconstruct(measure) - t).norm(), 1e-10 * max(1.0, t.norm()))

    def test_dump_shape(self):
        dump = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J).as_dict()
        self.assertEqual(sorted(dump), ["atoms", "basis", "j"])
        self.assertEqual(len(dump["basis"]), 2)
        self.assertEqual(dump["atoms"][0]["projection"]["n"], 2)

    def test_inconsistent_measure(self):
        measure = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J)
        broken = SpectralMeasure(measure.atoms[:1], J, 2)
        with self.assertRaises(InconsistentMeasureError):
            reconstruct(broken)

    def test_null_atom(self):
        measure = spectral_measure(diag([Quaternion(1.0), Quaternion(3.0)]), J).with_null_atom(Quaternion(2.0))
        self.assertEqual([a.p.re for a in measure.atoms], [1.0, 2.0, 3.0])
        self.assertTrue(measure.atoms[1].is_null)
        self.assertTrue(reconstruct(measure).allclose(diag([Quaternion(1.0), Quaternion(3.0)]), 1e-14))


class PolarizationTests(SimpleTestCase):
    def test_identity_recovers_inner_product(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            x, y = random_vector(3, rng), random_vector(3, rng)
            direct = Quaternion.from_array(np.sum(qmul(y * [1, -1, -1, -1], x), axis=0))
            self.assertLessEqual((polarization(quadratic_form(identity(3)), x, y) - direct).norm(), 1e-12)

    def test_diagonal_pairing(self):
        rng = np.random.default_rng(17)
        t = random_matrix(3, rng)
        x = random_vector(3, rng)
        form = quadratic_form(t)
        self.assertLessEqual((polarization(form, x, x) - Quaternion.from_array(form(x))).norm(), 1e-12 * max(1.0, t.norm()))

    def test_zero(self):
        rng = np.random.default_rng(18)
        value = polarization(quadratic_form(zeros(2)), random_vector(2, rng), random_vector(2, rng))
        self.assertEqual(value.norm(), 0.0)

    def test_random_triples(self):
        for rng in trial_generators(20, seed=19):
            n = int(rng.integers(1, 6))
            t = random_matrix(n, rng)
            x, y = random_vector(n, rng), random_vector(n, rng)
            direct = Quaternion.from_array(np.sum(qmul(y * [1, -1, -1, -1], t @ x), axis=0))
            bound = 1e-11 * max(1.0, t.norm()) * max(1.0, vec_norm(x)) * max(1.0, vec_norm(y))
            self.assertLessEqual((polarization(quadratic_form(t), x, y) - direct).norm(), bound)


class MuTests(SimpleTestCase):
    def test_basis_vector_masses(self):
        measure = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J)
        y1 = measure.basis.vectors[0]
        mu = measure_mu_xy(measure, y1, y1)
        self.assertLessEqual((mu.masses[0] - 1.0).norm(), 1e-15)
        self.assertLessEqual(mu.masses[1].norm(), 1e-15)

    def test_properties(self):
        for rng in trial_generators(10, seed=20):
            n = int(rng.integers(1, 6))
            measure = spectral_measure(random_normal(n, rng), J)
            x, y, z = (random_vector(n, rng) for _ in range(3))
            alpha, beta = random_quaternion(rng), random_quaternion(rng)
            report = check_mu_properties(measure, x, y, z, alpha, beta)
            self.assertTrue(report.passed, report.as_dict())
            self.assertLessEqual(measure_mu_xy(measure, x, y).conj().distance(measure_mu_xy(measure, y, x)), 1e-12)
            self.assertLessEqual(mu_polarization(measure, x, y).distance(measure_mu_xy(measure, x, y)), 1e-11)

    def test_total_mass_is_inner_product(self):
        rng = np.random.default_rng(21)
        measure = spectral_measure(random_normal(4, rng), J)
        x, y = random_vector(4, rng), random_vector(4, rng)
        direct = Quaternion.from_array(np.sum(qmul(y * [1, -1, -1, -1], x), axis=0))
        self.assertLessEqual((measure_mu_xy(measure, x, y).total() - direct).norm(), 1e-12)


class AxiomTests(SimpleTestCase):
    def test_diagonal(self):
        measure = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J)
        self.assertTrue(verify_measure_axioms(measure).passed)

    def test_random_normal(self):
        for rng in trial_generators(50, seed=22):
            measure = spectral_measure(random_normal(int(rng.integers(2, 7)), rng), J)
            report = verify_measure_axioms(measure, rng=rng)
            self.assertTrue(report.passed, report.as_dict())

    def test_perturbed_projection_fails(self):
        measure = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J)
        bent = measure.atoms[0].projection * 1.01
        atoms = (Atom(measure.atoms[0].p, bent, measure.atoms[0].vectors),) + measure.atoms[1:]
        report = verify_measure_axioms(SpectralMeasure(atoms, J, 2))
        self.assertFalse(report.passed)
        self.assertIn("idempotent", [c.name for c in report.failures])


class CommutantTests(SimpleTestCase):
    def test_self(self):
        t = random_normal(3, np.random.default_rng(23))
        self.assertEqual(commutant_check(t, t, J), (True, True))

    def test_polynomial_in_abj(self):
        rng = np.random.default_rng(24)
        t = random_normal(4, rng)
        dec = decompose_TABJ(t, J)
        w = dec.A @ dec.B + dec.J * 2.0 + dec.A @ dec.A @ dec.J - dec.B * 0.5
        self.assertEqual(commutant_check(t, w, J), (True, True))

    def test_generic(self):
        rng = np.random.default_rng(25)
        t = conjugate_diagonal([Quaternion(1.0), Quaternion(0.0, 2.0, 0.0, 0.0), Quaternion(-1.0, 0.5, 0.0, 0.0)], random_unitary(3, rng))
        self.assertEqual(commutant_check(t, random_matrix(3, rng), J), (False, False))

    def test_sides_agree(self):
        for k, rng in enumerate(trial_generators(50, seed=26)):
            n = int(rng.integers(1, 5))
            t = random_normal(n, rng)
            if k % 2:
                dec = decompose_TABJ(t, J)
                w = dec.A * float(rng.standard_normal()) + dec.J @ dec.B
            else:
                w = random_matrix(n, rng)
            first, second = commutant_check(t, w, J)
            self.assertEqual(first, second)


class UniquenessTests(SimpleTestCase):
    def test_same_matrix(self):
        t = random_normal(3, np.random.default_rng(27))
        report = measures_agree(spectral_measure(t, J), spectral_measure(t, J))
        self.assertTrue(report.passed, report.as_dict())

    def test_different_matrices(self):
        first = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J)
        second = spectral_measure(diag([Quaternion(2.0), Quaternion(1.0)]), J)
        report = measures_agree(first, second)
        self.assertFalse(report.passed)
        self.assertIn("projections", [c.name for c in report.failures])

    def test_spanning_set_of_unit_vectors(self):
        measure = spectral_measure(diag([Quaternion(1.0), Quaternion(2.0)]), J)
        vectors = [qreal(np.eye(2)[k]) for k in range(2)]
        self.assertTrue(measures_agree(measure, measure, vectors).passed)
