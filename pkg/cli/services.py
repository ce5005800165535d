"""
Pipelines behind the management commands, and the verification suite.

Every pipeline returns a PipelineResult; writing files and mapping errors to exit codes is
left to the commands.
"""
from __future__ import annotations

import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from django.conf import settings

from bounded_transform.services import (
    corollary_forms_check,
    recover_T_detailed,
    transform_identities_check,
    transform_report,
    z_transform,
)
from core.checks import CheckReport
from core.exceptions import (
    ConvergenceError,
    MatrixFormatError,
    NotNormalError,
    QSpecError,
)
from core.reports import spectrum_rows_to_csv, write_json, write_text
from functional_calculus.library import ABS2, EXP, EXP_RE, IDENTITY, SQRT, SQUARE, parse_function
from functional_calculus.models import SimpleFunction
from functional_calculus.services import (
    calc_continuous,
    calc_simple,
    change_of_variables_check,
    check_isometry_and_selfadjoint_parts,
    homomorphism_check,
    poly_approx_report,
    riesz_functional_check,
    spectral_mapping_check,
    sqrt_via_calculus,
)
from qmatrix.models import QMatrix
from qmatrix.sampling import random_matrix, random_normal, random_quaternion, random_unit_imaginary
from qmatrix.serializers import dump_matrix, load_matrix
from qmatrix.services import classify, sqrt_positive
from quaternion_core.models import Quaternion
from s_spectrum.services import axial_symmetry_check, check_resolvent_equation, s_spectrum, spectrum_bound_check
from spectral_core.models import Atom, SpectralMeasure
from spectral_core.services import (
    check_decomposition,
    check_mu_properties,
    commutant_check,
    decompose_TABJ,
    integrate,
    measures_agree,
    reconstruct,
    spectral_measure,
    verify_measure_axioms,
)

from .models import PipelineResult, RunConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_CONVERGENCE = 3
EXIT_NOT_NORMAL = 4

GOLDEN_SUFFIX = ".golden.json"
GOLDEN_ATOL = 1e-9


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, NotNormalError):
        return EXIT_NOT_NORMAL
    if isinstance(exc, ConvergenceError):
        return EXIT_CONVERGENCE
    return EXIT_PARSE


def load_input(cfg: RunConfig) -> QMatrix:
    if cfg.input is None:
        raise MatrixFormatError(f"{cfg.command} needs --input.")
    return load_matrix(cfg.input)


def _header(cfg: RunConfig) -> dict[str, Any]:
    return {"config": cfg.as_dict()}


def run_spectrum(cfg: RunConfig) -> PipelineResult:
    t = load_input(cfg)
    spectrum = s_spectrum(t, cfg.j, cfg.tol)
    payload = _header(cfg) | {"spectrum": spectrum.as_dict()}
    return PipelineResult(payload, spectrum.csv_rows())


def run_decompose(cfg: RunConfig) -> PipelineResult:
    t = load_input(cfg)
    dec = decompose_TABJ(t, cfg.j, cfg.tol)
    report = check_decomposition(t, dec, cfg.tol)
    payload = _header(cfg) | {"decomposition": dec.as_dict(), "checks": report.as_dict()}
    return PipelineResult(payload, passed=report.passed)


def run_measure(cfg: RunConfig) -> PipelineResult:
    t = load_input(cfg)
    measure = spectral_measure(t, cfg.j, cfg.tol)
    residual = (reconstruct(measure) - t).norm()
    payload = _header(cfg) | {"measure": measure.as_dict(), "reconstruct_residual": residual}
    return PipelineResult(payload, measure.csv_rows())


def run_apply(cfg: RunConfig) -> PipelineResult:
    t = load_input(cfg)
    f = parse_function(cfg.fn)
    measure = spectral_measure(t, cfg.j, cfg.tol)
    result = calc_simple(measure, f) if isinstance(f, SimpleFunction) else calc_continuous(measure, f)
    payload = _header(cfg) | {"function": cfg.fn, "result": dump_matrix(result)}
    return PipelineResult(payload)


def run_transform(cfg: RunConfig) -> PipelineResult:
    t = load_input(cfg)
    report = transform_report(t, cfg.j, cfg.tol)
    passed = report["checks"]["passed"] and report.get("recovery_checks", {"passed": True})["passed"]
    return PipelineResult(_header(cfg) | {"transform": report}, passed=bool(passed))


def _sphere_distance(p: Quaternion, q: Quaternion) -> float:
    return math.hypot(p.re - q.re, p.abs_im - q.abs_im)


def sample_resolvent_pair(
    t: QMatrix,
    reps: Sequence[Quaternion],
    rng: np.random.Generator,
    attempts: int = 100,
) -> tuple[Quaternion, Quaternion]:
    """
    Random s, p drawn at the scale of ||T||, kept a margin of 0.1 max(1, ||T||) away from every
    sphere of T and from each other's sphere.
    """
    radius = max(1.0, t.norm())
    margin = 0.1 * radius
    for _ in range(attempts):
        s, p = random_quaternion(rng, radius), random_quaternion(rng, radius)
        if _sphere_distance(s, p) < margin:
            continue
        if any(_sphere_distance(x, r) < margin for x in (s, p) for r in reps):
            continue
        return s, p
    logger.debug("sample_resolvent_pair: no pair after %d draws, using points outside the ball", attempts)
    shift = t.norm() + 1.5
    s = Quaternion(shift) + random_unit_imaginary(rng) * float(rng.uniform(0.2, 1.0))
    p = Quaternion(-shift) + random_unit_imaginary(rng) * float(rng.uniform(0.2, 1.0))
    return s, p


def _perturbed(measure: SpectralMeasure, factor: float = 1.01) -> SpectralMeasure:
    first = measure.atoms[0]
    atoms = (Atom(first.p, first.projection * factor, first.vectors),) + measure.atoms[1:]
    return SpectralMeasure(atoms, measure.j, measure.n)


def _poly_targets(t: QMatrix, cfg: RunConfig) -> list:
    targets = [EXP_RE, ABS2]
    if classify(t, cfg.tol).positive:
        targets.append(SQRT)
    return targets


def verify_matrix(t: QMatrix, cfg: RunConfig, rng: np.random.Generator | None = None) -> CheckReport:
    """Every module's checks on one normal matrix, aggregated into one report."""
    rng = rng or cfg.rng()
    tol = cfg.tol
    j = cfg.j
    scale = max(1.0, t.norm())
    report = CheckReport("verify")

    spectrum = s_spectrum(t, j, tol)
    if not spectrum.normal:
        raise NotNormalError("verify needs a normal matrix.")
    report.extend(spectrum_bound_check(t, spectrum, tol))
    report.extend(axial_symmetry_check(t, 5, rng, spectrum, tol))
    for _ in range(3):
        s, p = sample_resolvent_pair(t, spectrum.reps, rng)
        residual = check_resolvent_equation(t, s, p, tol).residual
        report.residual_below("resolvent_equation", residual, 1e-9 * scale)

    dec = decompose_TABJ(t, j, tol)
    report.extend(check_decomposition(t, dec, tol))
    measure = spectral_measure(t, j, tol)
    report.residual_below("reconstruct", (reconstruct(measure) - t).norm(), 1e-10 * scale)
    report.extend(verify_measure_axioms(measure, 3, rng, tol))
    report.flag("negative_control", not verify_measure_axioms(_perturbed(measure), 1, rng, tol).passed)
    x, y, z = (rng.standard_normal((t.n, 4)) for _ in range(3))
    report.extend(check_mu_properties(measure, x, y, z, random_quaternion(rng), random_quaternion(rng), tol))
    report.extend(measures_agree(measure, spectral_measure(t, j, tol), tol=tol))

    inside = integrate(measure, [Quaternion(float(rng.standard_normal())) + j * float(rng.standard_normal()) for _ in measure.atoms])
    generic = random_matrix(t.n, rng)
    for name, w in (("commutant_inside", inside), ("commutant_generic", generic)):
        with_abj, with_e = commutant_check(t, w, j, tol)
        report.flag(name, with_abj == with_e, f"abj={with_abj}, e={with_e}")

    report.extend(homomorphism_check(measure, SQUARE, EXP, tol))
    report.extend(check_isometry_and_selfadjoint_parts(t, EXP, 3, rng, j, tol))
    report.extend(spectral_mapping_check(t, SQUARE, j, tol))
    report.extend(riesz_functional_check(measure, ABS2, x, tol))
    report.residual_below(
        "change_of_variables",
        change_of_variables_check(measure, SQUARE, IDENTITY),
        10.0 * tol.threshold(scale * scale),
    )
    for f in _poly_targets(t, cfg):
        report.extend(poly_approx_report(t, f, (1e-4, 1e-6), j, tol), prefix=f"poly_approx.{f.name}")
    if classify(t, tol).positive:
        root = sqrt_via_calculus(t, j, tol)
        report.residual_below("sqrt_unique", (root - sqrt_positive(t, tol)).norm(), 1e-9 * scale)

    pair = z_transform(t, tol)
    report.extend(transform_identities_check(pair, tol))
    report.extend(recover_T_detailed(pair, j, tol).checks)
    flags = classify(t, tol)
    if flags.hermitian or flags.anti_hermitian or flags.unitary:
        report.extend(corollary_forms_check(t, j, tol))
    return report


def compare_golden(measure: SpectralMeasure, golden: dict[str, Any], atol: float = GOLDEN_ATOL) -> CheckReport:
    """Atoms (points and projections) and, when present, the basis against a stored measure dump."""
    report = CheckReport("golden")
    atoms = golden.get("atoms", [])
    report.flag("atom_count", len(atoms) == len(measure.atoms), f"{len(measure.atoms)} vs {len(atoms)}")
    if len(atoms) != len(measure.atoms):
        return report
    worst_p = 0.0
    worst_e = 0.0
    for atom, expected in zip(measure.atoms, atoms):
        worst_p = max(worst_p, float(np.max(np.abs(atom.p.as_array() - np.asarray(expected["p"], dtype=float)))))
        entries = np.asarray(expected["projection"]["entries"], dtype=float)
        if entries.shape != atom.projection.data.shape:
            worst_e = math.inf
            continue
        worst_e = max(worst_e, float(np.max(np.abs(atom.projection.data - entries), initial=0.0)))
    report.residual_below("atom_points", worst_p, atol)
    report.residual_below("projections", worst_e, atol)
    if "basis" in golden:
        found = np.asarray(measure.basis.as_lists(), dtype=float)
        expected = np.asarray(golden["basis"], dtype=float)
        same_shape = found.shape == expected.shape
        report.flag("basis_shape", same_shape, f"{found.shape} vs {expected.shape}")
        if same_shape:
            report.residual_below("basis", float(np.max(np.abs(found - expected), initial=0.0)), atol)
    return report


def corpus_entries(directory: Path) -> list[Path]:
    return sorted(p for p in directory.glob("*.json") if not p.name.endswith(GOLDEN_SUFFIX))


def _load_golden(path: Path) -> dict[str, Any]:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MatrixFormatError(f"Cannot read golden file {path}: {exc}") from exc


def verify_entry(path: Path, cfg: RunConfig) -> CheckReport:
    try:
        t = load_matrix(path)
        report = verify_matrix(t, cfg)
        golden = path.with_name(path.name[: -len(".json")] + GOLDEN_SUFFIX)
        if golden.exists():
            report.extend(compare_golden(spectral_measure(t, cfg.j, cfg.tol), _load_golden(golden)))
    except QSpecError as exc:
        # keep the class so the exit code survives, and name the entry
        raise type(exc)(f"{path.name}: {exc}") from exc
    return report


def _random_suite(cfg: RunConfig) -> Iterable[tuple[str, QMatrix, np.random.Generator]]:
    trials = int(getattr(settings, "QSPEC_VERIFY_TRIALS", 20))
    max_dim = int(getattr(settings, "QSPEC_VERIFY_MAX_DIM", 6))
    for k, rng in enumerate(np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(trials)):
        n = int(rng.integers(1, max_dim + 1))
        yield f"random_{k:03d}_n{n}", random_normal(n, rng), rng


def run_verify(cfg: RunConfig) -> PipelineResult:
    """Verify a matrix file, a corpus directory, or (no input) a seeded random suite."""
    reports: dict[str, CheckReport] = {}
    if cfg.input is None:
        for name, t, rng in _random_suite(cfg):
            reports[name] = verify_matrix(t, cfg, rng)
    elif cfg.input.is_dir():
        entries = corpus_entries(cfg.input)
        if not entries:
            raise MatrixFormatError(f"No matrix files in {cfg.input}.")
        for path in entries:
            reports[path.stem] = verify_entry(path, cfg)
    else:
        reports[cfg.input.stem] = verify_entry(cfg.input, cfg)

    failures = [f"{name}.{c.name}" for name, r in reports.items() for c in r.failures]
    passed = not failures
    logger.info("verify: %d matrices, %d failed checks", len(reports), len(failures))
    payload = _header(cfg) | {
        "passed": passed,
        "failures": failures,
        "reports": {name: r.as_dict() for name, r in reports.items()},
    }
    return PipelineResult(payload, passed=passed, failures=failures)


PIPELINES = {
    "spectrum": run_spectrum,
    "decompose": run_decompose,
    "measure": run_measure,
    "apply": run_apply,
    "transform": run_transform,
    "verify": run_verify,
}


def emit(result: PipelineResult, cfg: RunConfig) -> str:
    """Render the report (CSV when asked for and available, JSON otherwise) and write it to --output."""
    if cfg.format == "csv" and result.rows is not None:
        return write_text(spectrum_rows_to_csv(result.rows), cfg.output)
    return write_json(result.payload, cfg.output)
