import json
import shutil
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from core.exceptions import ConfigurationError, ConvergenceError, MatrixFormatError, NotNormalError
from qmatrix.sampling import random_normal
from qmatrix.serializers import load_matrix
from s_spectrum.services import check_resolvent_equation, s_spectrum
from spectral_core.services import spectral_measure

from .serializers import build_run_config
from .services import (
    EXIT_CONVERGENCE,
    EXIT_NOT_NORMAL,
    EXIT_PARSE,
    EXIT_VERIFY_FAILED,
    compare_golden,
    corpus_entries,
    exit_code_for,
    sample_resolvent_pair,
)

CORPUS = Path(__file__).resolve().parent / "fixtures" / "corpus"


def run(command, **options):
    out = StringIO()
    call_command(command, stdout=out, **options)
    return out.getvalue()


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmp, True)

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text, encoding="utf-8")
        return path

    def assertExitCode(self, code, command, **options):
        with self.assertRaises(CommandError) as ctx:
            run(command, **options)
        self.assertEqual(ctx.exception.returncode, code, str(ctx.exception))


class RunConfigTests(SimpleTestCase):
    def test_defaults_come_from_settings(self):
        cfg = build_run_config("spectrum", {"input": "m.json"})
        self.assertEqual(cfg.j.as_list(), [0.0, 1.0, 0.0, 0.0])
        self.assertEqual(cfg.tol.atol, 1e-12)
        self.assertEqual(cfg.tol.rtol, 1e-10)
        self.assertEqual(cfg.seed, 42)
        self.assertEqual(cfg.format, "json")

    @override_settings(QSPEC_SEED=7, QSPEC_DEFAULT_J="e3")
    def test_settings_override(self):
        cfg = build_run_config("verify", {})
        self.assertEqual(cfg.seed, 7)
        self.assertEqual(cfg.j.as_list(), [0.0, 0.0, 0.0, 1.0])
        self.assertIsNone(cfg.input)

    def test_explicit_unit(self):
        cfg = build_run_config("spectrum", {"input": "m.json", "j": "0,0.6,0.8"})
        self.assertAlmostEqual(cfg.j.s2, 0.6, places=15)
        self.assertAlmostEqual(cfg.j.s3, 0.8, places=15)

    def test_rejects_bad_options(self):
        for options in (
            {"input": "m.json", "atol": -1.0},
            {"input": "m.json", "rtol": 0.0},
            {"input": "m.json", "j": "0,0,0"},
            {"input": "m.json", "format": "xml"},
            {},
        ):
            with self.assertRaises(ConfigurationError):
                build_run_config("spectrum", options)


class ExitCodeTests(SimpleTestCase):
    def test_mapping(self):
        self.assertEqual(exit_code_for(NotNormalError("x")), EXIT_NOT_NORMAL)
        self.assertEqual(exit_code_for(ConvergenceError("x")), EXIT_CONVERGENCE)
        self.assertEqual(exit_code_for(MatrixFormatError("x")), EXIT_PARSE)
        self.assertEqual(exit_code_for(ConfigurationError("x")), EXIT_PARSE)


class SpectrumCommandTests(CommandTestCase):
    def test_diagonal(self):
        report = json.loads(run("spectrum", input=str(CORPUS / "diag_1_2.json")))
        spheres = report["spectrum"]["spheres"]
        self.assertEqual(len(spheres), 2)
        self.assertEqual(report["config"]["command"], "spectrum")

    def test_rep_in_requested_slice(self):
        report = json.loads(run("spectrum", input=str(CORPUS / "e2_1x1.json"), j="e1"))
        self.assertEqual(len(report["spectrum"]["spheres"]), 1)
        rep = np.asarray(report["spectrum"]["spheres"][0]["rep"])
        self.assertTrue(np.allclose(rep, [0.0, 1.0, 0.0, 0.0], atol=1e-12))

    def test_csv(self):
        text = run("spectrum", input=str(CORPUS / "diag_1_2.json"), format="csv")
        lines = text.strip().splitlines()
        self.assertEqual(lines[0], "re,abs_im,multiplicity")
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[1].startswith("1,"))

    def test_output_file_is_byte_identical_across_runs(self):
        first, second = self.tmp / "a.json", self.tmp / "b.json"
        for path in (first, second):
            message = run("spectrum", input=str(CORPUS / "rotation_2x2.json"), output=str(path))
            self.assertIn("written", message)
        self.assertEqual(first.read_bytes(), second.read_bytes())

    def test_malformed_json(self):
        path = self.write("bad.json", '{"n": 2, "entries": [[')
        self.assertExitCode(EXIT_PARSE, "spectrum", input=str(path))

    def test_ragged_rows(self):
        path = self.write("ragged.json", '{"n": 2, "entries": [[[1,0,0,0]], [[0,0,0,0],[1,0,0,0]]]}')
        self.assertExitCode(EXIT_PARSE, "spectrum", input=str(path))

    def test_missing_file(self):
        self.assertExitCode(EXIT_PARSE, "spectrum", input=str(self.tmp / "absent.json"))

    def test_missing_input(self):
        self.assertExitCode(EXIT_PARSE, "spectrum")

    def test_invalid_tolerance(self):
        self.assertExitCode(EXIT_PARSE, "spectrum", input=str(CORPUS / "e1_1x1.json"), atol=-1.0)


class DecomposeCommandTests(CommandTestCase):
    def test_normal(self):
        report = json.loads(run("decompose", input=str(CORPUS / "rotation_2x2.json")))
        self.assertTrue(report["checks"]["passed"])
        self.assertEqual(report["decomposition"]["kernel_flag"], "none")

    def test_non_normal(self):
        path = self.write("upper.json", '{"n": 2, "entries": [[[1,0,0,0],[1,0,0,0]], [[0,0,0,0],[2,0,0,0]]]}')
        self.assertExitCode(EXIT_NOT_NORMAL, "decompose", input=str(path))


class MeasureCommandTests(CommandTestCase):
    def test_goldens(self):
        for entry in corpus_entries(CORPUS):
            report = json.loads(run("measure", input=str(entry)))
            golden = json.loads(entry.with_name(entry.stem + ".golden.json").read_text(encoding="utf-8"))
            self.assertEqual(len(report["measure"]["atoms"]), len(golden["atoms"]), entry.name)
            self.assertLess(report["reconstruct_residual"], 1e-12, entry.name)


class ApplyCommandTests(CommandTestCase):
    def test_identity_returns_input(self):
        for entry in corpus_entries(CORPUS):
            report = json.loads(run("apply", input=str(entry), fn="id"))
            expected = load_matrix(entry).data
            self.assertTrue(np.allclose(np.asarray(report["result"]["entries"]), expected, atol=1e-12), entry.name)

    def test_square_of_rotation(self):
        report = json.loads(run("apply", input=str(CORPUS / "rotation_2x2.json"), fn="sq"))
        expected = -np.eye(2)[:, :, None] * np.array([1.0, 0.0, 0.0, 0.0])
        self.assertTrue(np.allclose(np.asarray(report["result"]["entries"]), expected, atol=1e-12))

    def test_indicator(self):
        report = json.loads(run("apply", input=str(CORPUS / "diag_1_2.json"), fn="chi:0"))
        entries = np.asarray(report["result"]["entries"])
        self.assertAlmostEqual(entries[0, 0, 0], 1.0, places=12)
        self.assertAlmostEqual(entries[1, 1, 0], 0.0, places=12)

    def test_unknown_function(self):
        self.assertExitCode(EXIT_PARSE, "apply", input=str(CORPUS / "e1_1x1.json"), fn="tan")


class TransformCommandTests(CommandTestCase):
    def test_roundtrip(self):
        report = json.loads(run("transform", input=str(CORPUS / "diag_1_2.json")))["transform"]
        self.assertLess(report["roundtrip_residual"], 1e-8 * 2.0)
        self.assertAlmostEqual(report["norm_Z"], 2.0 / np.sqrt(5.0), places=12)
        self.assertIn("direct_route_residual", report)


class VerifyCommandTests(CommandTestCase):
    def copy_corpus(self):
        target = self.tmp / "corpus"
        shutil.copytree(CORPUS, target)
        return target

    def test_corpus_passes(self):
        output = self.tmp / "verify.json"
        run("verify", input=str(CORPUS), output=str(output))
        report = json.loads(output.read_text(encoding="utf-8"))
        self.assertTrue(report["passed"], report["failures"])
        self.assertEqual(sorted(report["reports"]), ["diag_1_2", "e1_1x1", "e2_1x1", "rotation_2x2"])

    def test_single_file(self):
        report = json.loads(run("verify", input=str(CORPUS / "rotation_2x2.json")))
        self.assertTrue(report["passed"], report["failures"])

    def test_golden_mismatch(self):
        corpus = self.copy_corpus()
        golden = corpus / "diag_1_2.golden.json"
        data = json.loads(golden.read_text(encoding="utf-8"))
        data["atoms"][1]["p"] = [2.5, 0, 0, 0]
        golden.write_text(json.dumps(data), encoding="utf-8")
        self.assertExitCode(EXIT_VERIFY_FAILED, "verify", input=str(corpus))

    def test_malformed_entry(self):
        corpus = self.copy_corpus()
        (corpus / "broken.json").write_text('{"n": 1, "entries": [[[1, 0, 0]]]}', encoding="utf-8")
        self.assertExitCode(EXIT_PARSE, "verify", input=str(corpus))

    def test_non_normal_entry(self):
        corpus = self.copy_corpus()
        (corpus / "upper.json").write_text(
            '{"n": 2, "entries": [[[1,0,0,0],[1,0,0,0]], [[0,0,0,0],[2,0,0,0]]]}', encoding="utf-8"
        )
        self.assertExitCode(EXIT_NOT_NORMAL, "verify", input=str(corpus))

    def test_empty_directory(self):
        self.assertExitCode(EXIT_PARSE, "verify", input=str(self.tmp))

    @override_settings(QSPEC_VERIFY_TRIALS=2, QSPEC_VERIFY_MAX_DIM=3)
    def test_random_suite_is_reproducible(self):
        first = run("verify", seed=5)
        second = run("verify", seed=5)
        self.assertEqual(first, second)
        report = json.loads(first)
        self.assertTrue(report["passed"], report["failures"])
        self.assertEqual(len(report["reports"]), 2)


class GoldenComparisonTests(SimpleTestCase):
    def test_matches_stored_measure(self):
        t = load_matrix(CORPUS / "e2_1x1.json")
        golden = json.loads((CORPUS / "e2_1x1.golden.json").read_text(encoding="utf-8"))
        self.assertTrue(compare_golden(spectral_measure(t), golden).passed)

    def test_atom_count_mismatch(self):
        t = load_matrix(CORPUS / "diag_1_2.json")
        golden = json.loads((CORPUS / "e1_1x1.golden.json").read_text(encoding="utf-8"))
        report = compare_golden(spectral_measure(t), golden)
        self.assertFalse(report.passed)
        self.assertEqual(report.failures[0].name, "atom_count")


class ResolventPairTests(SimpleTestCase):
    def sphere_distance(self, p, q):
        return float(np.hypot(p.re - q.re, p.abs_im - q.abs_im))

    def test_pairs_avoid_spectrum_and_each_other(self):
        t = random_normal(3, np.random.default_rng(70))
        reps = s_spectrum(t).reps
        margin = 0.1 * max(1.0, t.norm())
        rng = np.random.default_rng(71)
        pairs = [sample_resolvent_pair(t, reps, rng) for _ in range(10)]
        for s, p in pairs:
            self.assertGreaterEqual(self.sphere_distance(s, p), margin)
            for r in reps:
                self.assertGreaterEqual(self.sphere_distance(s, r), margin)
                self.assertGreaterEqual(self.sphere_distance(p, r), margin)
            self.assertLess(check_resolvent_equation(t, s, p).residual, 1e-9 * max(1.0, t.norm()))
        self.assertEqual(len({(s.re, p.re) for s, p in pairs}), len(pairs))

    def test_same_seed_same_pairs(self):
        t = load_matrix(CORPUS / "rotation_2x2.json")
        reps = s_spectrum(t).reps
        first = sample_resolvent_pair(t, reps, np.random.default_rng(72))
        second = sample_resolvent_pair(t, reps, np.random.default_rng(72))
        self.assertEqual(first, second)
