import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ScalarFactorSingularError, SpectrumPointError
from qmatrix.models import QMatrix
from qmatrix.sampling import (
    random_matrix,
    random_normal,
    random_quaternion,
    random_unit_imaginary,
    trial_generators,
)
from qmatrix.services import apply, diag, identity, zeros
from quaternion_core.array_utils import qmul
from quaternion_core.models import Quaternion
from quaternion_core.services import parse_unit, slice_split, sphere_representative

from .services import (
    axial_symmetry_check,
    check_resolvent_equation,
    in_s_resolvent_set,
    pseudo_resolvent,
    s_resolvent_left,
    s_resolvent_right,
    s_spectrum,
    spectrum_bound_check,
)

E1 = Quaternion(0, 1, 0, 0)
E2 = Quaternion(0, 0, 1, 0)
J = parse_unit("e1")


def scalar(q) -> QMatrix:
    return diag([q])


def distance_to_sphere(p: Quaternion, s: Quaternion) -> float:
    return math.hypot(p.re - s.re, p.abs_im - s.abs_im)


class PseudoResolventTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(pseudo_resolvent(identity(2), Quaternion(1.0)), zeros(2))
        self.assertTrue(pseudo_resolvent(identity(2), Quaternion(3.0)).allclose(identity(2) * 4.0, 0.0))
        self.assertTrue(pseudo_resolvent(scalar(E1), E2).allclose(zeros(1), 0.0))

    def test_depends_only_on_sphere(self):
        rng = np.random.default_rng(1)
        t = random_matrix(3, rng)
        s = random_quaternion(rng)
        self.assertEqual(pseudo_resolvent(t, s), pseudo_resolvent(t, sphere_representative(s, J)))

    def test_membership(self):
        self.assertFalse(in_s_resolvent_set(identity(2), Quaternion(1.0)))
        self.assertTrue(in_s_resolvent_set(identity(2), Quaternion(3.0)))
        rng = np.random.default_rng(2)
        for _ in range(5):
            self.assertFalse(in_s_resolvent_set(scalar(E1), random_unit_imaginary(rng)))


class SpectrumTests(SimpleTestCase):
    def test_diagonal(self):
        spectrum = s_spectrum(diag([Quaternion(1.0), Quaternion(2.0)]))
        self.assertEqual(len(spectrum.spheres), 2)
        for sphere, expected in zip(spectrum.spheres, (1.0, 2.0)):
            self.assertAlmostEqual(sphere.rep.re, expected, places=14)
            self.assertEqual(sphere.rep.abs_im, 0.0)
            self.assertEqual(sphere.multiplicity, 1)
        self.assertTrue(spectrum.normal)

    def test_imaginary_unit(self):
        spectrum = s_spectrum(scalar(E1), J)
        self.assertEqual(len(spectrum.spheres), 1)
        sphere = spectrum.spheres[0]
        self.assertLessEqual((sphere.rep - E1).norm(), 1e-15)
        self.assertEqual(sphere.multiplicity, 1)

    def test_rotation_has_double_sphere(self):
        t = QMatrix([[[0, 0, 0, 0], [1, 0, 0, 0]], [[-1, 0, 0, 0], [0, 0, 0, 0]]])
        spectrum = s_spectrum(t, J)
        self.assertEqual(len(spectrum.spheres), 1)
        self.assertEqual(spectrum.spheres[0].multiplicity, 2)
        self.assertLessEqual((spectrum.spheres[0].rep - E1).norm(), 1e-14)

    def test_eigenvectors_land_in_slice(self):
        for unit in ("e1", "e2", "0.6,0,0.8"):
            j = parse_unit(unit)
            spectrum = s_spectrum(scalar(E2), j)
            sphere = spectrum.spheres[0]
            self.assertLessEqual((sphere.rep - j).norm(), 1e-14)
            y = sphere.vectors[0]
            np.testing.assert_allclose(apply(scalar(E2), y), qmul(y, sphere.rep.as_array()), atol=1e-14)

    def test_random_normal_projections(self):
        for rng in trial_generators(10, seed=3):
            n = int(rng.integers(1, 7))
            t = random_normal(n, rng)
            spectrum = s_spectrum(t, J)
            self.assertEqual(spectrum.total_multiplicity, n)
            self.assertLessEqual((spectrum.projection_sum() - identity(n)).norm(), 1e-10)
            for sphere in spectrum.spheres:
                p = sphere.projection
                self.assertLessEqual((p @ p - p).norm(), 1e-10)
                self.assertLessEqual((p - p.H).norm(), 1e-12)
                self.assertGreaterEqual(sphere.rep.s1, 0.0)
                for y in sphere.vectors:
                    residual = apply(t, y) - qmul(y, sphere.rep.as_array())
                    self.assertLessEqual(float(np.sqrt(np.sum(residual ** 2))), 1e-10 * max(1.0, t.norm()))
                self.assertFalse(in_s_resolvent_set(t, sphere.rep))

    def test_sorted_spheres(self):
        t = random_normal(5, np.random.default_rng(4))
        keys = [(s.rep.re, s.rep.abs_im) for s in s_spectrum(t).spheres]
        self.assertEqual(keys, sorted(keys))

    def test_non_normal_has_no_projections(self):
        t = QMatrix([[[1, 0, 0, 0], [1, 0, 0, 0]], [[0, 0, 0, 0], [2, 0, 0, 0]]])
        with self.assertLogs("s_spectrum", level="WARNING"):
            spectrum = s_spectrum(t)
        self.assertFalse(spectrum.normal)
        self.assertEqual([round(s.rep.re, 12) for s in spectrum.spheres], [1.0, 2.0])
        self.assertTrue(all(s.projection is None for s in spectrum.spheres))


class ResolventTests(SimpleTestCase):
    def test_left_examples(self):
        self.assertTrue(s_resolvent_left(zeros(2), Quaternion(1.0)).allclose(identity(2), 1e-15))
        self.assertTrue(s_resolvent_left(scalar(Quaternion(1.0)), Quaternion(3.0)).allclose(scalar(Quaternion(0.5)), 1e-15))

    def test_left_on_imaginary_unit(self):
        s = Quaternion(2.0)
        q = E1 * E1 - E1 * 4.0 + 4.0
        expected = -(q.inverse() * (E1 - s))
        self.assertLessEqual((s_resolvent_left(scalar(E1), s).entry(0, 0) - expected).norm(), 1e-15)

    def test_right_examples(self):
        self.assertTrue(s_resolvent_right(zeros(3), Quaternion(1.0)).allclose(identity(3), 1e-15))
        t = diag([Quaternion(1.0), Quaternion(-2.0)])
        s = Quaternion(0.5)
        self.assertTrue(s_resolvent_right(t, s).allclose(s_resolvent_left(t, s), 1e-14))

    def test_right_resolvent_norm_bound(self):
        rng = np.random.default_rng(5)
        t = random_normal(4, rng)
        s = Quaternion(3.0 * max(1.0, t.norm()), 1.0, 0.0, 0.0)
        dist = s.norm() - t.norm()
        self.assertLessEqual(s_resolvent_right(t, s).norm(), 2.0 / dist)

    def test_spectrum_point_rejected(self):
        with self.assertRaises(SpectrumPointError):
            s_resolvent_left(identity(2), Quaternion(1.0))
        with self.assertRaises(SpectrumPointError):
            s_resolvent_right(scalar(E1), E2)


class ResolventEquationTests(SimpleTestCase):
    def test_closed_form(self):
        report = check_resolvent_equation(zeros(1), Quaternion(1.0), Quaternion(2.0))
        self.assertLessEqual(report.residual, 1e-12)
        self.assertAlmostEqual(report.lhs_norm, 0.5)

    def test_random_triples(self):
        checked = 0
        for rng in trial_generators(100, seed=6):
            n = int(rng.integers(1, 7))
            t = random_normal(n, rng)
            spheres = s_spectrum(t).reps
            s, p = random_quaternion(rng, 2.0), random_quaternion(rng, 2.0)
            if distance_to_sphere(p, s) < 0.1:
                continue
            if min(distance_to_sphere(x, r) for x in (s, p) for r in spheres) < 0.1:
                continue
            report = check_resolvent_equation(t, s, p)
            self.assertLessEqual(report.residual, 1e-9 * max(1.0, t.norm()))
            checked += 1
        self.assertGreater(checked, 30)

    def test_p_on_sphere_of_s(self):
        s = Quaternion(0.5, 2.0, 0.0, 0.0)
        p = Quaternion(0.5, 0.0, 0.0, 2.0)
        with self.assertRaises(ScalarFactorSingularError):
            check_resolvent_equation(zeros(2), s, p)


class SpectrumCheckTests(SimpleTestCase):
    def test_bound_checks(self):
        self.assertTrue(spectrum_bound_check(scalar(E1)).passed)
        report = spectrum_bound_check(diag([Quaternion(1.0), Quaternion(2.0)]))
        self.assertTrue(report.passed)
        self.assertIn("positive_in_0_norm", [c.name for c in report.checks])
        report = spectrum_bound_check(diag([Quaternion(1.0), Quaternion(-2.0)]))
        self.assertTrue(report.passed)
        self.assertIn("hermitian_real", [c.name for c in report.checks])

    def test_axial_symmetry(self):
        for rng in trial_generators(3, seed=8):
            t = random_normal(3, rng)
            report = axial_symmetry_check(t, samples=20, rng=rng)
            self.assertTrue(report.passed, report.as_dict())

    def test_slice_split_of_reps(self):
        spectrum = s_spectrum(random_normal(3, np.random.default_rng(9)), J)
        for rep in spectrum.reps:
            point = slice_split(rep, J)
            self.assertEqual(point.j, J)
