import json

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    MatrixFormatError,
    NotHermitianError,
    NotInvertibleError,
    NotPositiveError,
    SymplecticStructureError,
)
from quaternion_core.array_utils import qmul
from quaternion_core.models import Quaternion

from .array_utils import chi, complex_to_vec, jmap, vec_to_complex
from .eigen_utils import complex_schur, group_points, jacobi_hermitian
from .models import QMatrix
from .sampling import random_hermitian, random_matrix, random_normal, random_unitary, trial_generators
from .serializers import dump_matrix, load_matrix
from .services import (
    abs_op,
    adjoint,
    apply,
    chi_embed,
    chi_extract,
    classify,
    diag,
    hermitian_eigen,
    identity,
    inner,
    matmul,
    operator_norm,
    qr_orthonormalize,
    scalar_matrix,
    sqrt_positive,
    synthesize,
    vector_norm,
    zeros,
)

E1 = Quaternion(0, 1, 0, 0)
E2 = Quaternion(0, 0, 1, 0)
E3 = Quaternion(0, 0, 0, 1)


def scalar(q: Quaternion) -> QMatrix:
    return diag([q])


class MatrixAlgebraTests(SimpleTestCase):
    def test_identity_is_neutral(self):
        a = random_matrix(3, np.random.default_rng(1))
        self.assertEqual(matmul(identity(3), a), a)
        self.assertEqual(matmul(a, identity(3)), a)

    def test_scalar_product(self):
        self.assertEqual(matmul(scalar(E1), scalar(E2)), scalar(E3))

    def test_chi_is_multiplicative(self):
        rng = np.random.default_rng(2)
        for n in (1, 2, 4):
            a, b = random_matrix(n, rng), random_matrix(n, rng)
            np.testing.assert_allclose(chi_embed(a @ b), chi_embed(a) @ chi_embed(b), atol=1e-12)
            np.testing.assert_allclose(chi_embed(a.H), chi_embed(a).conj().T, atol=0)

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionMismatchError):
            matmul(identity(2), identity(3))
        with self.assertRaises(DimensionMismatchError):
            apply(identity(2), np.zeros((3, 4)))

    def test_adjoint(self):
        self.assertEqual(adjoint(identity(2)), identity(2))
        self.assertTrue(adjoint(scalar(E1)).allclose(scalar(-E1), 0.0))
        rng = np.random.default_rng(3)
        a = random_matrix(4, rng)
        self.assertEqual(adjoint(adjoint(a)), a)
        x, y = rng.standard_normal((4, 4)), rng.standard_normal((4, 4))
        lhs = inner(apply(a, x), y)
        rhs = inner(x, apply(adjoint(a), y))
        self.assertLessEqual((lhs - rhs).norm(), 1e-12)
        b = random_matrix(4, rng)
        self.assertLessEqual((adjoint(a @ b) - adjoint(b) @ adjoint(a)).norm(), 1e-12 * a.norm() * b.norm())

    def test_apply_right_linearity(self):
        rng = np.random.default_rng(4)
        a = random_matrix(3, rng)
        x = rng.standard_normal((3, 4))
        np.testing.assert_array_equal(apply(identity(3), x), x)
        np.testing.assert_array_equal(apply(a, np.zeros((3, 4))), np.zeros((3, 4)))
        alpha = rng.standard_normal(4)
        np.testing.assert_allclose(apply(a, qmul(x, alpha)), qmul(apply(a, x), alpha), atol=1e-13)

    def test_scalar_matrix_acts_on_the_left(self):
        rng = np.random.default_rng(5)
        q = Quaternion.from_array(rng.standard_normal(4))
        x = rng.standard_normal((2, 4))
        np.testing.assert_allclose(apply(scalar_matrix(q, 2), x), qmul(q.as_array(), x), atol=1e-15)

    def test_entrywise_scalar_multiplication(self):
        a = scalar(E1)
        self.assertTrue((a * E2).allclose(scalar(E3), 0.0))
        self.assertTrue((E2 * a).allclose(scalar(-E3), 0.0))


class ChiEmbeddingTests(SimpleTestCase):
    def test_block_convention(self):
        np.testing.assert_array_equal(chi_embed(scalar(E2)), np.array([[0, 1], [-1, 0]], dtype=complex))
        np.testing.assert_array_equal(chi_embed(identity(3)), np.eye(6))

    def test_roundtrip_is_exact(self):
        a = random_matrix(5, np.random.default_rng(6))
        self.assertEqual(chi_extract(chi_embed(a)), a)

    def test_extract_rejects_non_symplectic(self):
        with self.assertRaises(SymplecticStructureError):
            chi_extract(np.array([[1, 0], [0, 2]], dtype=complex))
        with self.assertRaises(SymplecticStructureError):
            chi_extract(np.eye(3))

    def test_vector_embedding_intertwines(self):
        rng = np.random.default_rng(7)
        a = random_matrix(3, rng)
        x = rng.standard_normal((3, 4))
        np.testing.assert_allclose(chi(a.data) @ vec_to_complex(x), vec_to_complex(apply(a, x)), atol=1e-13)
        np.testing.assert_array_equal(complex_to_vec(vec_to_complex(x)), x)
        np.testing.assert_allclose(vec_to_complex(qmul(x, E2.as_array())), jmap(vec_to_complex(x)), atol=1e-15)


class NormTests(SimpleTestCase):
    def test_simple_norms(self):
        self.assertEqual(operator_norm(zeros(3)), 0.0)
        self.assertAlmostEqual(operator_norm(scalar(E3 * 2)), 2.0, places=14)

    def test_sampled_lower_bound(self):
        rng = np.random.default_rng(8)
        a = random_matrix(4, rng)
        bound = operator_norm(a)
        best = 0.0
        for _ in range(200):
            x = rng.standard_normal((4, 4))
            x /= vector_norm(x)
            ax = vector_norm(apply(a, x))
            self.assertLessEqual(ax, bound + 1e-10)
            best = max(best, ax)
        self.assertGreater(best, 0.5 * bound)


class ClassifyTests(SimpleTestCase):
    def test_identity(self):
        flags = classify(identity(3))
        self.assertTrue(flags.hermitian and flags.unitary and flags.normal and flags.positive)
        self.assertFalse(flags.anti_hermitian)

    def test_imaginary_unit(self):
        flags = classify(scalar(E1))
        self.assertTrue(flags.anti_hermitian and flags.unitary and flags.normal)
        self.assertFalse(flags.hermitian or flags.positive)

    def test_gram_matrix_is_positive(self):
        g = random_matrix(4, np.random.default_rng(9))
        self.assertTrue(classify(g.H @ g).positive)
        self.assertFalse(classify(-(g.H @ g)).positive)

    def test_normal_flag_matches_residual(self):
        rng = np.random.default_rng(10)
        self.assertTrue(classify(random_normal(4, rng)).normal)
        self.assertFalse(classify(random_matrix(4, rng)).normal)


class HermitianEigenTests(SimpleTestCase):
    def test_diagonal(self):
        eig = hermitian_eigen(diag([Quaternion(1.0), Quaternion(2.0)]))
        np.testing.assert_allclose(eig.values, [1.0, 2.0], atol=1e-15)
        np.testing.assert_allclose(np.abs(eig.vectors.data), np.abs(identity(2).data), atol=1e-15)

    def test_off_diagonal_units(self):
        a = QMatrix.from_entries([[Quaternion(), E1], [-E1, Quaternion()]])
        eig = hermitian_eigen(a)
        np.testing.assert_allclose(eig.values, [-1.0, 1.0], atol=1e-14)
        for k in range(2):
            v = eig.vector(k)
            np.testing.assert_allclose(apply(a, v), v * eig.values[k], atol=1e-14)

    def test_random_reconstruction(self):
        for rng in trial_generators(10, seed=11):
            n = int(rng.integers(1, 7))
            a = random_hermitian(n, rng)
            eig = hermitian_eigen(a)
            self.assertLessEqual((synthesize(eig) - a).norm(), 1e-10 * max(1.0, a.norm()))
            gram = eig.vectors.H @ eig.vectors
            self.assertLessEqual((gram - identity(n)).norm(), 1e-12)

    def test_eigenvectors_orthonormal_to_working_precision(self):
        for rng in trial_generators(50, seed=3):
            n = int(rng.integers(2, 6))
            a = random_hermitian(n, rng)
            eig = hermitian_eigen(a)
            self.assertLessEqual((eig.vectors.H @ eig.vectors - identity(n)).norm(), 1e-12)
            self.assertLessEqual((synthesize(eig) - a).norm(), 1e-12 * a.norm())
            for k in range(n):
                v = eig.vector(k)
                residual = np.sqrt(np.sum((apply(a, v) - v * eig.values[k]) ** 2))
                self.assertLessEqual(residual, 1e-12 * a.norm())

    def test_gram_of_scaled_matrix(self):
        rng = np.random.default_rng(14)
        t = random_matrix(4, rng, scale=1e3)
        g = identity(4) + t.H @ t
        g = (g + g.H) * 0.5
        eig = hermitian_eigen(g)
        self.assertLessEqual((eig.vectors.H @ eig.vectors - identity(4)).norm(), 1e-12)
        self.assertLessEqual((synthesize(eig) - g).norm(), 1e-12 * g.norm())

    def test_unitary_invariance(self):
        rng = np.random.default_rng(12)
        a = random_hermitian(4, rng)
        u = random_unitary(4, rng)
        b = u.H @ a @ u
        b = (b + b.H) * 0.5
        np.testing.assert_allclose(hermitian_eigen(a).values, hermitian_eigen(b).values, atol=1e-10)

    def test_repeated_eigenvalues(self):
        rng = np.random.default_rng(13)
        u = random_unitary(4, rng)
        a = u @ diag([Quaternion(1.0), Quaternion(1.0), Quaternion(3.0), Quaternion(3.0)]) @ u.H
        a = (a + a.H) * 0.5
        eig = hermitian_eigen(a)
        np.testing.assert_allclose(eig.values, [1, 1, 3, 3], atol=1e-12)
        self.assertLessEqual((synthesize(eig) - a).norm(), 1e-11)

    def test_rejects_non_hermitian(self):
        with self.assertRaises(NotHermitianError):
            hermitian_eigen(scalar(E1))


class SquareRootTests(SimpleTestCase):
    def test_diagonal(self):
        root = sqrt_positive(diag([Quaternion(4.0), Quaternion(9.0)]))
        self.assertTrue(root.allclose(diag([Quaternion(2.0), Quaternion(3.0)]), 1e-14))
        self.assertTrue(sqrt_positive(identity(3)).allclose(identity(3), 1e-14))

    def test_random_gram(self):
        for rng in trial_generators(5, seed=14):
            g = random_matrix(4, rng)
            a = g.H @ g
            a = (a + a.H) * 0.5
            w = sqrt_positive(a)
            self.assertTrue(classify(w).positive)
            self.assertLessEqual((w @ w - a).norm(), 1e-9 * a.norm())

    def test_negative_rejected(self):
        with self.assertRaises(NotPositiveError):
            sqrt_positive(diag([Quaternion(-1.0), Quaternion(1.0)]))

    def test_modulus(self):
        self.assertTrue(abs_op(scalar(Quaternion(-3.0))).allclose(scalar(Quaternion(3.0)), 1e-14))
        self.assertTrue(abs_op(scalar(E1 * 2)).allclose(scalar(Quaternion(2.0)), 1e-14))
        u = random_unitary(3, np.random.default_rng(15))
        self.assertLessEqual((abs_op(u) - identity(3)).norm(), 1e-12)


class EigenSolverTests(SimpleTestCase):
    def test_complex_schur(self):
        rng = np.random.default_rng(16)
        for n in (1, 2, 5, 8):
            m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            s, q = complex_schur(m)
            np.testing.assert_allclose(q @ s @ q.conj().T, m, atol=1e-12 * max(1.0, np.linalg.norm(m)))
            np.testing.assert_allclose(q.conj().T @ q, np.eye(n), atol=1e-13)
            self.assertTrue(np.allclose(np.tril(s, -1), 0.0))

    def test_schur_of_rotation(self):
        s, _ = complex_schur(np.array([[0.0, 1.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(sorted(np.diag(s).imag), [-1.0, 1.0], atol=1e-14)

    def test_iteration_cap(self):
        with self.assertRaises(ConvergenceError):
            complex_schur(np.array([[0.0, 1.0], [2.0, 0.0]]), max_iter=0)

    def test_jacobi(self):
        rng = np.random.default_rng(17)
        g = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        h = g + g.conj().T
        w, v = jacobi_hermitian(h)
        np.testing.assert_allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-12 * np.linalg.norm(h))
        np.testing.assert_allclose(v.conj().T @ v, np.eye(6), atol=1e-13)
        self.assertTrue(np.all(np.diff(w) >= 0))

    def test_group_points(self):
        values = np.array([2 + 1j, 1.0, 2 - 1j, 1.0 + 1e-12])
        self.assertEqual(group_points(values, 1e-9), [[1, 3], [0, 2]])


class OrthonormalizeTests(SimpleTestCase):
    def test_orthonormal_output(self):
        rng = np.random.default_rng(18)
        basis = qr_orthonormalize([rng.standard_normal((3, 4)) for _ in range(3)])
        for i, x in enumerate(basis):
            for k, y in enumerate(basis):
                expected = Quaternion(1.0) if i == k else Quaternion()
                self.assertLessEqual((inner(x, y) - expected).norm(), 1e-14)

    def test_dependent_vectors(self):
        rng = np.random.default_rng(19)
        x = rng.standard_normal((2, 4))
        with self.assertRaises(NotInvertibleError):
            qr_orthonormalize([x, qmul(x, E2.as_array())])


class MatrixFileTests(SimpleTestCase):
    def test_load_and_dump(self):
        payload = {"n": 1, "entries": [[[0, 0, 1, 0]]]}
        a = load_matrix(json.dumps(payload))
        self.assertEqual(a, scalar(E2))
        self.assertEqual(dump_matrix(a), {"n": 1, "entries": [[[0.0, 0.0, 1.0, 0.0]]]})

    def test_rejects_bad_payloads(self):
        bad = [
            "{not json",
            json.dumps([1, 2]),
            json.dumps({"n": 2, "entries": [[[1, 0, 0, 0], [0, 0, 0, 0]], [[0, 0, 0, 0]]]}),
            json.dumps({"n": 1, "entries": [[[1, 0, 0]]]}),
            json.dumps({"n": 1, "entries": [[["1", 0, 0, 0]]]}),
            json.dumps({"n": 2, "entries": [[[1, 0, 0, 0]]]}),
            '{"n": 1, "entries": [[[NaN, 0, 0, 0]]]}',
            json.dumps({"n": True, "entries": [[[1, 0, 0, 0]]]}),
        ]
        for text in bad:
            with self.assertRaises(MatrixFormatError, msg=text):
                load_matrix(text)

    def test_missing_file(self):
        with self.assertRaises(MatrixFormatError):
            load_matrix("/nonexistent/matrix.json")
