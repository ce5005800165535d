import numpy as np
from django.test import SimpleTestCase, override_settings

from core.exceptions import (
    ApproximationError,
    InvalidSliceFunctionError,
    NotInvertibleError,
    NotPositiveError,
    OverlappingSetsError,
    UndefinedOnAtomError,
)
from qmatrix.sampling import (
    conjugate_diagonal,
    random_hermitian,
    random_matrix,
    random_normal,
    random_unitary,
    random_vector,
    trial_generators,
)
from qmatrix.services import diag, identity, sqrt_positive
from quaternion_core.models import Quaternion
from quaternion_core.services import parse_unit
from spectral_core.services import decompose_TABJ, spectral_measure

from .library import ABS2, EXP, EXP_RE, IDENTITY, IMAGINARY_PART, REAL_PART, SQRT, SQUARE, constant, parse_function
from .models import INFINITY, BInftyFunction, SimpleFunction, SliceFunction
from .services import (
    calc_binf,
    calc_continuous,
    calc_poly_approx,
    calc_simple,
    change_of_variables_check,
    check_isometry_and_selfadjoint_parts,
    eval_slice,
    homomorphism_check,
    identity_check,
    invert_calc,
    poly_approx_report,
    pushforward,
    riesz_functional_check,
    spectral_mapping_check,
    sqrt_via_calculus,
)

E1 = Quaternion(0, 1, 0, 0)
E2 = Quaternion(0, 0, 1, 0)
J = parse_unit("e1")


def reals(*values):
    return diag([Quaternion(float(x)) for x in values])


class SliceFunctionTests(SimpleTestCase):
    def test_identity_off_slice(self):
        q = Quaternion(2.0) + E2 * 3.0
        self.assertLess((eval_slice(IDENTITY, q, J) - q).norm(), 1e-15)

    def test_square_of_unit(self):
        self.assertLess((eval_slice(SQUARE, E1, J) - Quaternion(-1.0)).norm(), 1e-15)

    def test_square_any_unit(self):
        u = parse_unit("0.6,0,0.8")
        q = Quaternion(1.0) + u * 2.0
        self.assertLess((eval_slice(SQUARE, q, J) - q * q).norm(), 1e-13)

    def test_symmetry_violation(self):
        bad = SliceFunction("bad", lambda u, v: v, lambda u, v: 0.0)
        with self.assertRaises(InvalidSliceFunctionError):
            bad.check_symmetry(1.0, 1.0)

    def test_real_points_skip_symmetry(self):
        SQRT.check_symmetry(-4.0, 0.0)

    def test_undefined_point(self):
        inverse = parse_function("inv")
        with self.assertRaises(UndefinedOnAtomError):
            eval_slice(inverse, Quaternion(0.0), J)

    def test_parse(self):
        self.assertIs(parse_function("sq"), SQUARE)
        self.assertEqual(parse_function("const:2").on_slice(1 + 1j), 2)
        self.assertFalse(parse_function("const:1+2j").intrinsic)
        self.assertIsInstance(parse_function("chi:1"), SimpleFunction)
        for text in ("bogus", "chi:x", "chi:-1", "const:abc"):
            with self.assertRaises(InvalidSliceFunctionError):
                parse_function(text)

    def test_overlapping_sets(self):
        with self.assertRaises(OverlappingSetsError):
            SimpleFunction(((1.0, frozenset({0, 1})), (2.0, frozenset({1}))))


class ContinuousCalculusTests(SimpleTestCase):
    def test_identity_gives_t(self):
        for rng in trial_generators(50, seed=31):
            t = random_normal(int(rng.integers(1, 6)), rng)
            measure = spectral_measure(t, J)
            self.assertLess((calc_continuous(measure, IDENTITY) - t).norm(), 1e-9)

    def test_one_gives_identity(self):
        measure = spectral_measure(random_normal(3, np.random.default_rng(32)), J)
        self.assertLess((calc_continuous(measure, constant(1.0)) - identity(3)).norm(), 1e-12)
        self.assertLess(identity_check(measure), 1e-12)

    def test_square_of_unit_matrix(self):
        measure = spectral_measure(diag([E1]), J)
        self.assertTrue(calc_continuous(measure, SQUARE).allclose(reals(-1.0), 1e-14))

    def test_square_matches_product(self):
        t = random_normal(4, np.random.default_rng(33))
        measure = spectral_measure(t, J)
        self.assertLess((calc_continuous(measure, SQUARE) - t @ t).norm(), 1e-9)

    def test_infinite_on_live_atom(self):
        measure = spectral_measure(reals(0.0, 1.0), J)
        with self.assertRaises(UndefinedOnAtomError):
            calc_continuous(measure, BInftyFunction((INFINITY, 1.0)))

    def test_null_atom_is_ignored(self):
        measure = spectral_measure(reals(1.0, 2.0), J).with_null_atom(Quaternion(0.0))
        inverse = calc_continuous(measure, parse_function("inv"))
        self.assertTrue(inverse.allclose(reals(1.0, 0.5), 1e-14))


class SimpleCalculusTests(SimpleTestCase):
    def test_indicator_is_projection(self):
        measure = spectral_measure(random_normal(3, np.random.default_rng(34)), J)
        for k, atom in enumerate(measure.atoms):
            self.assertTrue(calc_simple(measure, parse_function(f"chi:{k}")).allclose(atom.projection, 1e-14))

    def test_product_of_simple_functions(self):
        measure = spectral_measure(reals(1.0, 2.0, 3.0), J)
        f = SimpleFunction.from_values([2.0, 1j, 0.0])
        g = SimpleFunction.from_values([1.0, 3.0, 5.0])
        fg = SimpleFunction.from_values([2.0, 3j, 0.0])
        product = calc_simple(measure, f) @ calc_simple(measure, g)
        self.assertTrue(calc_simple(measure, fg).allclose(product, 1e-13))

    def test_out_of_range_index_is_dropped(self):
        measure = spectral_measure(reals(1.0), J)
        self.assertTrue(calc_simple(measure, parse_function("chi:4")).allclose(reals(0.0), 0.0))


class PolynomialCalculusTests(SimpleTestCase):
    def test_real_part_gives_a(self):
        t = random_normal(3, np.random.default_rng(35))
        dec = decompose_TABJ(t, J)
        self.assertLess((calc_poly_approx(t, REAL_PART, 1e-10, J) - dec.A).norm(), 1e-8)

    def test_imaginary_part_gives_jb(self):
        t = random_normal(3, np.random.default_rng(36))
        dec = decompose_TABJ(t, J)
        self.assertLess((calc_poly_approx(t, IMAGINARY_PART, 1e-10, J) - dec.J @ dec.B).norm(), 1e-8)

    def test_exp_re_matches_atomic(self):
        t = random_normal(3, np.random.default_rng(37))
        exact = calc_continuous(spectral_measure(t, J), EXP_RE)
        self.assertLess((calc_poly_approx(t, EXP_RE, 1e-8, J) - exact).norm(), 1e-6)

    def test_exp_matches_atomic(self):
        t = random_normal(2, np.random.default_rng(38), scale=0.5)
        exact = calc_continuous(spectral_measure(t, J), EXP)
        self.assertLess((calc_poly_approx(t, EXP, 1e-8, J) - exact).norm(), 1e-6)

    def test_report_within_eps(self):
        t = random_normal(3, np.random.default_rng(39), scale=0.5)
        report = poly_approx_report(t, EXP_RE, (1e-2, 1e-4, 1e-6), J)
        self.assertTrue(report.passed, report.as_dict())
        self.assertEqual(
            [c.name for c in report.checks],
            ["eps=0.01", "eps=0.0001", "halving:eps=0.0001", "eps=1e-06", "halving:eps=1e-06"],
        )

    def test_sqrt_with_eigenvalue_near_zero(self):
        values = [Quaternion(4.8e-5), Quaternion(6.48), Quaternion(12.72)]
        t = conjugate_diagonal(values, random_unitary(3, np.random.default_rng(60)))
        t = (t + t.H) * 0.5
        root = sqrt_positive(t)
        for eps in (1e-2, 1e-4, 1e-6):
            self.assertLess((calc_poly_approx(t, SQRT, eps, J) - root).norm(), 2.0 * eps + 1e-9)

    def test_sqrt_of_random_gram(self):
        for rng in trial_generators(5, seed=3):
            h = random_hermitian(3, rng)
            t = h @ h.H
            t = (t + t.H) * 0.5
            report = poly_approx_report(t, SQRT, (1e-2, 1e-4, 1e-6), J)
            self.assertTrue(report.passed, report.as_dict())

    def test_abs2_is_exact(self):
        for rng in trial_generators(5, seed=61):
            t = random_normal(3, rng)
            report = poly_approx_report(t, ABS2, (1e-4, 1e-6), J)
            self.assertTrue(report.passed, report.as_dict())
            self.assertLess(report.worst("eps=1e-06"), 1e-9)

    def test_sqrt_of_positive_matches_atomic(self):
        for rng in trial_generators(5, seed=62):
            g = random_matrix(3, rng)
            t = g.H @ g + identity(3) * 0.1
            t = (t + t.H) * 0.5
            exact = calc_continuous(spectral_measure(t, J), SQRT)
            for eps in (1e-4, 1e-6):
                self.assertLess((calc_poly_approx(t, SQRT, eps, J) - exact).norm(), 2.0 * eps + 1e-9)

    def test_non_intrinsic_rejected(self):
        with self.assertRaises(InvalidSliceFunctionError):
            calc_poly_approx(reals(1.0), constant(1j), 1e-8, J)

    @override_settings(QSPEC_POLY_DEGREE_CAP=1)
    def test_degree_cap(self):
        with self.assertRaises(ApproximationError):
            calc_poly_approx(reals(0.0, 5.0, 10.0), EXP_RE, 1e-14, J)

    @override_settings(QSPEC_POLY_DEGREE_CAP=2)
    def test_interpolates_at_atoms_past_the_cap(self):
        t = reals(0.0, 3.0, 10.0)
        expected = reals(1.0, np.exp(3.0), np.exp(10.0))
        with self.assertLogs("functional_calculus", "INFO"):
            result = calc_poly_approx(t, EXP_RE, 1e-6, J)
        self.assertLess((result - expected).norm(), 1e-6)


class UnboundedCalculusTests(SimpleTestCase):
    def setUp(self):
        self.measure = spectral_measure(reals(1.0, 2.0), J)
        self.f = BInftyFunction((INFINITY, 1.0), name="pole")

    def test_domain_excludes_pole(self):
        result = calc_binf(self.measure, self.f)
        self.assertEqual(result.infinite_atoms, (0,))
        self.assertFalse(result.full_domain)
        self.assertTrue(result.domain.allclose(reals(0.0, 1.0), 1e-14))
        self.assertTrue(result.operator.allclose(reals(0.0, 1.0), 1e-14))
        self.assertTrue(result.in_domain(np.array([[0.0] * 4, [1.0, 0.0, 0.0, 0.0]])))
        self.assertFalse(result.in_domain(np.array([[1.0, 0.0, 0.0, 0.0], [0.0] * 4])))
        self.assertTrue(result.checks.passed, result.checks.as_dict())

    def test_bounded_function_has_full_domain(self):
        result = calc_binf(self.measure, BInftyFunction((3.0, 0.25j)))
        self.assertTrue(result.full_domain)
        self.assertTrue(result.domain.allclose(identity(2), 1e-14))
        self.assertEqual(result.bounding_sequence[-1], (0, 1))
        self.assertEqual(len(result.bounding_sequence), 2)

    def test_from_callable_marks_poles(self):
        f = BInftyFunction.from_callable([1 + 0j, 2 + 0j], lambda z: 1.0 / (z - 1.0))
        self.assertEqual(f.infinite_atoms, (0,))
        self.assertEqual(f.values[1], 1.0)

    def test_value_count_mismatch(self):
        with self.assertRaises(InvalidSliceFunctionError):
            calc_binf(self.measure, BInftyFunction((1.0,)))

    def test_as_dict(self):
        out = calc_binf(self.measure, self.f).as_dict()
        self.assertEqual(out["infinite_atoms"], [0])
        self.assertFalse(out["full_domain"])


class InverseTests(SimpleTestCase):
    def test_diagonal(self):
        measure = spectral_measure(reals(1.0, 2.0), J)
        self.assertTrue(invert_calc(measure, IDENTITY).allclose(reals(1.0, 0.5), 1e-14))

    def test_inverse_times_t(self):
        t = random_normal(3, np.random.default_rng(40))
        measure = spectral_measure(t, J)
        self.assertLess((invert_calc(measure, IDENTITY) @ t - identity(3)).norm(), 1e-9)

    def test_vanishing_on_live_atom(self):
        measure = spectral_measure(reals(0.0, 1.0), J)
        with self.assertRaises(NotInvertibleError):
            invert_calc(measure, IDENTITY)


class PushforwardTests(SimpleTestCase):
    def test_shift(self):
        measure = spectral_measure(reals(1.0, 2.0), J)
        pushed = pushforward(measure, lambda z: z + 1.0)
        for point, expected in zip(pushed.points, (2.0, 3.0)):
            self.assertAlmostEqual(point.re, expected, places=12)
        for before, after in zip(measure.atoms, pushed.atoms):
            self.assertTrue(before.projection.allclose(after.projection, 0.0))

    def test_square_then_sqrt(self):
        t = reals(1.0, 4.0)
        pushed = pushforward(spectral_measure(t, J), SQUARE)
        self.assertTrue(calc_continuous(pushed, SQRT).allclose(t, 1e-13))

    def test_equal_images_merge(self):
        pushed = pushforward(spectral_measure(reals(1.0, -1.0), J), SQUARE)
        self.assertEqual(len(pushed.atoms), 1)
        self.assertEqual(pushed.atoms[0].multiplicity, 2)
        self.assertTrue(pushed.atoms[0].projection.allclose(identity(2), 1e-14))

    def test_change_of_variables(self):
        for rng in trial_generators(5, seed=41):
            measure = spectral_measure(random_normal(3, rng, scale=0.5), J)
            self.assertLess(change_of_variables_check(measure, SQUARE, EXP), 1e-9)

    def test_image_below_axis(self):
        t = diag([Quaternion(1.0) + E1 * 2.0])
        measure = spectral_measure(t, J)
        pushed = pushforward(measure, lambda z: z.conjugate())
        self.assertAlmostEqual(pushed.points[0].abs_im, 2.0)
        self.assertLess(change_of_variables_check(measure, lambda z: z.conjugate(), IDENTITY), 1e-12)


class PropertyTests(SimpleTestCase):
    def test_spectral_mapping(self):
        for rng in trial_generators(5, seed=42):
            t = random_normal(int(rng.integers(1, 5)), rng)
            report = spectral_mapping_check(t, SQUARE, J)
            self.assertTrue(report.passed, report.as_dict())

    def test_isometry_diagonal(self):
        report = check_isometry_and_selfadjoint_parts(reals(1.0, 2.0), IDENTITY, j=J)
        self.assertTrue(report.passed, report.as_dict())
        self.assertLess(report.worst("norm_equals_sup"), 1e-12)

    def test_isometry_random(self):
        for rng in trial_generators(4, seed=43):
            report = check_isometry_and_selfadjoint_parts(random_normal(3, rng), EXP, rng=rng, j=J)
            self.assertTrue(report.passed, report.as_dict())

    def test_homomorphism(self):
        for rng in trial_generators(50, seed=44):
            measure = spectral_measure(random_normal(3, rng), J)
            report = homomorphism_check(measure, SQUARE, EXP)
            self.assertTrue(report.passed, report.as_dict())

    def test_riesz_functional(self):
        rng = np.random.default_rng(45)
        measure = spectral_measure(random_normal(3, rng), J)
        report = riesz_functional_check(measure, ABS2, random_vector(3, rng))
        self.assertTrue(report.passed, report.as_dict())

    def test_sqrt_via_calculus(self):
        for rng in trial_generators(4, seed=46):
            g = random_matrix(3, rng)
            t = g.H @ g + identity(3) * 0.1
            self.assertLess((sqrt_via_calculus(t, J) - sqrt_positive(t)).norm(), 1e-9)

    def test_sqrt_needs_positive(self):
        with self.assertRaises(NotPositiveError):
            sqrt_via_calculus(reals(-1.0, 1.0), J)
