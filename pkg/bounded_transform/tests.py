import math

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import InconsistentMeasureError, NotNormalError, QuaternionDomainError
from qmatrix.models import QMatrix
from qmatrix.sampling import random_matrix, random_normal, random_quaternion, trial_generators
from qmatrix.services import classify, diag, hermitian_eigen, identity, zeros
from quaternion_core.models import Quaternion
from quaternion_core.services import exp_slice, parse_unit
from s_spectrum.services import s_spectrum

from .models import TransformPair
from .services import (
    c_transform,
    corollary_forms_check,
    phi,
    psi,
    recover_T,
    recover_T_detailed,
    recover_T_direct,
    transform_identities_check,
    transform_report,
    unbounded_model,
    z_transform,
)

E1 = Quaternion(0, 1, 0, 0)
E2 = Quaternion(0, 0, 1, 0)
J = parse_unit("e1")


def reals(*values):
    return diag([Quaternion(float(x)) for x in values])


def upper_triangular():
    return QMatrix.from_entries([[Quaternion(1.0), Quaternion(1.0)], [Quaternion(0.0), Quaternion(2.0)]])


class CTransformTests(SimpleTestCase):
    def test_zero(self):
        self.assertTrue(c_transform(zeros(2)).allclose(identity(2), 1e-15))

    def test_one(self):
        self.assertTrue(c_transform(reals(1.0)).allclose(reals(0.5), 1e-15))

    def test_random_in_unit_interval(self):
        for rng in trial_generators(5, seed=51):
            c = c_transform(random_matrix(3, rng))
            self.assertTrue(classify(c).positive)
            values = hermitian_eigen(c).values
            self.assertGreater(values[0], 0.0)
            self.assertLessEqual(values[-1], 1.0 + 1e-12)


class ZTransformTests(SimpleTestCase):
    def test_zero(self):
        self.assertTrue(z_transform(zeros(2)).Z.allclose(zeros(2), 0.0))

    def test_real_diagonal(self):
        values = (-2.0, 0.5, 3.0)
        pair = z_transform(reals(*values))
        expected = reals(*(t / math.sqrt(1.0 + t * t) for t in values))
        self.assertTrue(pair.Z.allclose(expected, 1e-14))

    def test_unit(self):
        pair = z_transform(diag([E1]))
        self.assertTrue(pair.C.allclose(reals(0.5), 1e-15))
        self.assertTrue(pair.Z.allclose(diag([E1 * (1.0 / math.sqrt(2.0))]), 1e-15))

    def test_identities_normal_and_not(self):
        for k, rng in enumerate(trial_generators(100, seed=52)):
            n = int(rng.integers(1, 5))
            t = random_normal(n, rng, scale=3.0) if k % 2 else random_matrix(n, rng, scale=3.0)
            report = transform_identities_check(z_transform(t))
            self.assertTrue(report.passed, report.as_dict())

    def test_as_dict(self):
        self.assertEqual(set(z_transform(reals(1.0)).as_dict()), {"T", "C", "Zroot", "Z"})


class PhiTests(SimpleTestCase):
    def test_zero(self):
        self.assertEqual(phi(Quaternion(0.0)), Quaternion(0.0))

    def test_half_root(self):
        self.assertAlmostEqual(phi(Quaternion(1.0 / math.sqrt(2.0))).re, 1.0, places=14)

    def test_outside_ball(self):
        for p in (Quaternion(1.0), E1 * 2.0):
            with self.assertRaises(QuaternionDomainError):
                phi(p)

    def test_roundtrip(self):
        for rng in trial_generators(10, seed=53):
            q = random_quaternion(rng, 10.0)
            self.assertLess((phi(psi(q)) - q).norm(), 1e-12 * max(1.0, q.norm()))
            p = psi(q)
            self.assertLess(p.norm(), 1.0)
            self.assertLess((psi(phi(p)) - p).norm(), 1e-14)


class RecoveryTests(SimpleTestCase):
    def test_zero(self):
        self.assertTrue(recover_T(z_transform(zeros(2)), J).allclose(zeros(2), 1e-15))

    def test_large_real(self):
        pair = z_transform(reals(1000.0))
        self.assertAlmostEqual(pair.Z.entry(0, 0).re, 1000.0 / math.sqrt(1.0 + 1e6), places=14)
        self.assertLess(abs(recover_T(pair, J).entry(0, 0).re - 1000.0), 1e-6 * 1000.0)

    def test_random_normal(self):
        for rng in trial_generators(100, seed=54):
            n = int(rng.integers(1, 5))
            t = random_normal(n, rng, scale=float(rng.uniform(1.0, 1e3)))
            recovery = recover_T_detailed(z_transform(t), J)
            self.assertTrue(recovery.checks.passed, recovery.checks.as_dict())
            self.assertLess((recovery.T - t).norm(), 1e-8 * t.norm())

    def test_random_normal_other_seeds(self):
        for seed in (1, 2):
            for rng in trial_generators(20, seed=seed):
                n = int(rng.integers(1, 5))
                t = random_normal(n, rng, scale=float(rng.uniform(1.0, 1e3)))
                pair = z_transform(t)
                self.assertTrue(transform_identities_check(pair).passed)
                recovery = recover_T_detailed(pair, J)
                self.assertTrue(recovery.checks.passed, recovery.checks.as_dict())
                self.assertLess((recovery.T - t).norm(), 1e-8 * t.norm())

    def test_random_normal_huge_norm(self):
        values = [
            Quaternion(1e6, 2e5, 0.0, 0.0),
            Quaternion(-4e5, 0.0, 7e5, 3e5),
            Quaternion(2e5, -1e6, 5e5, 8e5),
        ]
        t = random_normal(3, np.random.default_rng(59), values=values)
        self.assertGreater(t.norm(), 1e6)
        recovery = recover_T_detailed(z_transform(t), J)
        self.assertTrue(recovery.checks.passed, recovery.checks.as_dict())
        self.assertLess((recovery.T - t).norm(), 1e-6 * t.norm())
        self.assertEqual(len(recovery.measure_T.atoms), 3)

    def test_huge_norm(self):
        t = unbounded_model([(J * 1e6, 2)], J, np.random.default_rng(55))
        with self.assertLogs("bounded_transform", "WARNING"):
            recovery = recover_T_detailed(z_transform(t), J)
        self.assertLess((recovery.T - t).norm(), 1e-6 * t.norm())
        self.assertLess(recovery.min_gap, 1e-11)
        self.assertGreater(recovery.min_gap, 0.0)

    def test_direct_route(self):
        for rng in trial_generators(5, seed=56):
            t = random_normal(3, rng, scale=2.0)
            pair = z_transform(t)
            self.assertLess((recover_T_direct(pair) - recover_T(pair, J)).norm(), 1e-9 * max(1.0, t.norm()))

    def test_non_normal(self):
        with self.assertRaises(NotNormalError):
            recover_T(z_transform(upper_triangular()), J)

    def test_boundary_atom_with_mass(self):
        pair = TransformPair(identity(1), zeros(1), zeros(1), identity(1))
        with self.assertRaises(InconsistentMeasureError):
            recover_T(pair, J)

    def test_pushforward_atoms_are_spectrum_of_t(self):
        t = reals(-1.0, 2.0, 5.0)
        recovery = recover_T_detailed(z_transform(t), J)
        self.assertEqual(len(recovery.measure_T.atoms), 3)
        for atom, expected in zip(recovery.measure_T.atoms, (-1.0, 2.0, 5.0)):
            self.assertAlmostEqual(atom.p.re, expected, places=10)


class UnboundedModelTests(SimpleTestCase):
    def test_diagonal_spheres(self):
        t = unbounded_model([(Quaternion(1.0), 1), (Quaternion(2.0), 1)], J, np.random.default_rng(57))
        spheres = s_spectrum(t, J).spheres
        self.assertEqual([round(s.u, 10) for s in spheres], [1.0, 2.0])
        self.assertTrue(classify(t).hermitian)

    def test_anti_hermitian(self):
        t = unbounded_model([(J * 1e6, 1)], J)
        self.assertTrue(classify(t).anti_hermitian)
        self.assertAlmostEqual(t.norm(), 1e6, delta=1e-4)

    def test_prescribed_spheres(self):
        rng = np.random.default_rng(58)
        reps = [(Quaternion(0.5) + J * 2.0, 2), (Quaternion(-3.0), 1)]
        spheres = s_spectrum(unbounded_model(reps, J, rng), J).spheres
        self.assertEqual([s.multiplicity for s in spheres], [1, 2])
        self.assertAlmostEqual(spheres[0].u, -3.0, places=8)
        self.assertAlmostEqual(spheres[1].v, 2.0, places=8)

    def test_rejects_off_slice(self):
        with self.assertRaises(QuaternionDomainError):
            unbounded_model([(E2, 1)], J)
        with self.assertRaises(QuaternionDomainError):
            unbounded_model([(J * -1.0, 1)], J)


class CorollaryFormTests(SimpleTestCase):
    def test_hermitian(self):
        report = corollary_forms_check(reals(-1.0, 3.0), J)
        self.assertTrue(report.passed, report.as_dict())
        self.assertIn("hermitian", report.checks[-1].detail)

    def test_anti_hermitian(self):
        report = corollary_forms_check(diag([E1]), J)
        self.assertTrue(report.passed, report.as_dict())
        self.assertIn("anti_hermitian", report.checks[-1].detail)

    def test_unitary(self):
        report = corollary_forms_check(diag([exp_slice(E2 * (math.pi / 3.0))]), J)
        self.assertTrue(report.passed, report.as_dict())
        self.assertIn("unitary", report.checks[-1].detail)

    def test_generic_normal_is_flagged(self):
        report = corollary_forms_check(diag([Quaternion(1.0, 2.0, 0.0, 0.0)]), J)
        self.assertFalse(report.passed)
        self.assertEqual(report.failures[0].name, "normal_class")


class TransformReportTests(SimpleTestCase):
    def test_keys(self):
        out = transform_report(reals(1.0, 2.0), J)
        for key in ("norm_T", "norm_Z", "c_identity_residual", "adjoint_identity_residual",
                    "roundtrip_residual", "min_gap_1_minus_p2", "direct_route_residual"):
            self.assertIn(key, out)
        self.assertAlmostEqual(out["norm_T"], 2.0, places=12)
        self.assertAlmostEqual(out["min_gap_1_minus_p2"], 0.2, places=12)

    def test_non_normal_skips_roundtrip(self):
        out = transform_report(upper_triangular(), J)
        self.assertIsNone(out["roundtrip_residual"])
