import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import QuaternionDomainError

from .array_utils import left_regular_matrix, qmul
from .models import ImaginaryUnit, Quaternion, SlicePoint
from .services import (
    align_unit,
    conj,
    exp_slice,
    inverse,
    mul,
    norm,
    parse_unit,
    quaternion_to_slice,
    slice_split,
    slice_to_quaternion,
    sphere_representative,
)

ONE = Quaternion(1.0)
E1 = Quaternion(0, 1, 0, 0)
E2 = Quaternion(0, 0, 1, 0)
E3 = Quaternion(0, 0, 0, 1)


def random_quaternion(rng) -> Quaternion:
    return Quaternion.from_array(rng.standard_normal(4))


class QuaternionArithmeticTests(SimpleTestCase):
    def assertQuaternionClose(self, a, b, tol=1e-14):
        self.assertLessEqual((a - b).norm(), tol, f"{a} != {b}")

    def test_basis_relations(self):
        self.assertEqual(mul(E1, E2), E3)
        self.assertEqual(mul(E2, E3), E1)
        self.assertEqual(mul(E3, E1), E2)
        self.assertEqual(mul(E2, E1), -E3)
        for e in (E1, E2, E3):
            self.assertEqual(mul(e, e), Quaternion(-1.0))

    def test_conjugate_pair_product(self):
        self.assertEqual(mul(ONE + E1, ONE - E1), Quaternion(2.0))

    def test_product_matches_left_regular_representation(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            a, b = rng.standard_normal(4), rng.standard_normal(4)
            np.testing.assert_allclose(qmul(a, b), left_regular_matrix(a) @ b, atol=1e-14)

    def test_associativity(self):
        rng = np.random.default_rng(4)
        a, b, c = (random_quaternion(rng) for _ in range(3))
        self.assertQuaternionClose((a * b) * c, a * (b * c), 1e-13)

    def test_conj(self):
        self.assertEqual(conj(E1), -E1)
        self.assertEqual(conj(ONE + E2 * 2), ONE - E2 * 2)
        rng = np.random.default_rng(5)
        a, b = random_quaternion(rng), random_quaternion(rng)
        self.assertQuaternionClose(a * conj(a), Quaternion(a.norm() ** 2), 1e-13)
        self.assertQuaternionClose(conj(a * b), conj(b) * conj(a))

    def test_norm(self):
        self.assertEqual(norm(ONE + E1 + E2 + E3), 2.0)
        self.assertEqual(norm(Quaternion()), 0.0)
        rng = np.random.default_rng(6)
        for _ in range(20):
            a, b = random_quaternion(rng), random_quaternion(rng)
            self.assertAlmostEqual(norm(a * b), norm(a) * norm(b), delta=1e-13 * norm(a) * norm(b))

    def test_inverse(self):
        self.assertEqual(inverse(E1), -E1)
        self.assertEqual(inverse(Quaternion(2.0)), Quaternion(0.5))
        with self.assertRaises(QuaternionDomainError):
            inverse(Quaternion())
        rng = np.random.default_rng(7)
        a = random_quaternion(rng)
        self.assertQuaternionClose(a * inverse(a), ONE, 1e-13)
        self.assertQuaternionClose(inverse(a) * a, ONE, 1e-13)

    def test_equality_across_unit_subclass(self):
        self.assertEqual(ImaginaryUnit(0, 1, 0, 0), E1)
        self.assertEqual(Quaternion(3.0), 3)


class ImaginaryUnitTests(SimpleTestCase):
    def test_rejects_non_unit(self):
        with self.assertRaises(QuaternionDomainError):
            ImaginaryUnit(0, 2, 0, 0)
        with self.assertRaises(QuaternionDomainError):
            ImaginaryUnit(1, 0, 0, 0)

    def test_squares_to_minus_one(self):
        u = ImaginaryUnit.from_vector(1, 2, 3)
        self.assertLessEqual((u * u - Quaternion(-1.0)).norm(), 1e-15)

    def test_parse_unit(self):
        self.assertEqual(parse_unit("e2"), E2)
        self.assertEqual(parse_unit(" E3 "), E3)
        u = parse_unit("1,1,0")
        self.assertAlmostEqual(u.s1, 1 / math.sqrt(2))
        with self.assertRaises(QuaternionDomainError):
            parse_unit("1,1,0", strict=True)
        with self.assertRaises(QuaternionDomainError):
            parse_unit("0,0,0")
        with self.assertRaises(QuaternionDomainError):
            parse_unit("e4")

    def test_slice_point_rejects_negative_v(self):
        with self.assertRaises(QuaternionDomainError):
            SlicePoint(0.0, -1.0, parse_unit("e1"))


class SliceTests(SimpleTestCase):
    def test_slice_split(self):
        point = slice_split(Quaternion(3, 0, 4, 0))
        self.assertEqual((point.u, point.v), (3.0, 4.0))
        self.assertEqual(point.j, E2)

        point = slice_split(Quaternion(5.0), parse_unit("e1"))
        self.assertEqual((point.u, point.v, point.j), (5.0, 0.0, E1))

        point = slice_split(Quaternion(1, -2, 0, 0))
        self.assertEqual((point.u, point.v), (1.0, 2.0))
        self.assertEqual(point.j, -E1)

    def test_slice_split_roundtrip(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            q = random_quaternion(rng)
            self.assertLessEqual((slice_split(q).to_quaternion() - q).norm(), 1e-15 * max(1.0, q.norm()) * 4)

    def test_sphere_representative(self):
        j = parse_unit("e1")
        self.assertEqual(sphere_representative(Quaternion(2, 0, -3, 0), j), Quaternion(2, 3, 0, 0))
        self.assertEqual(sphere_representative(Quaternion(7.0), j), Quaternion(7.0))
        rng = np.random.default_rng(9)
        for _ in range(10):
            q = random_quaternion(rng)
            rep = sphere_representative(q, j)
            self.assertEqual(rep.re, q.re)
            self.assertAlmostEqual(rep.norm(), q.norm(), delta=1e-14 * q.norm())
            self.assertGreaterEqual(rep.s1, 0.0)
            self.assertEqual(sphere_representative(rep, j), rep)

    def test_slice_complex_identification(self):
        j = parse_unit("e2")
        q = slice_to_quaternion(2 - 3j, j)
        self.assertEqual(q, Quaternion(2, 0, -3, 0))
        self.assertEqual(quaternion_to_slice(q, j), 2 - 3j)
        with self.assertRaises(QuaternionDomainError):
            quaternion_to_slice(E1, j)

    def test_align_unit(self):
        j = parse_unit("e1")
        self.assertEqual(align_unit(j, j), ONE)
        a = align_unit(parse_unit("e2"), j)
        expected = (ONE + E3) / math.sqrt(2)
        self.assertLessEqual((a - expected).norm(), 1e-15)
        rng = np.random.default_rng(10)
        units = [ImaginaryUnit.from_vector(*rng.standard_normal(3)) for _ in range(20)]
        units.append(-j)
        units.append(ImaginaryUnit.from_vector(-1.0, 1e-9, 0.0))
        for u in units:
            u = ImaginaryUnit.from_vector(u.s1, u.s2, u.s3)
            a = align_unit(u, j)
            self.assertAlmostEqual(a.norm(), 1.0, delta=1e-14)
            self.assertLessEqual((inverse(a) * u * a - j).norm(), 1e-13)

    def test_exp_slice(self):
        q = exp_slice(E1 * math.pi)
        self.assertLessEqual((q - Quaternion(-1.0)).norm(), 1e-15)
        q = exp_slice(Quaternion(1.0, 0, math.pi / 2, 0))
        self.assertLessEqual((q - E2 * math.e).norm(), 1e-15)
