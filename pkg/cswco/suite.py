from __future__ import annotations

import cmath
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import RunConfig
from .hardy import OpMatrix, adjoint, block_residual, composition_matrix, cowen_adjoint_matrix, weighted_composition_matrix
from .moebius import (
    PHI_P_HYPERBOLIC,
    PHI_P_PARABOLIC,
    LFMap,
    NormalFormJ,
    classify_phi_p,
    cowen_triple,
    derivative,
    evaluate,
    fixed_points,
    phi_p,
    psi_p,
)
from .spectra import (
    compare_spectrum,
    eigenvalues,
    gelfand_radius,
    predict_compact,
    predict_disk,
    predict_j_form_radius,
    predict_parabolic_spiral,
    predict_rotation,
    spectral_mapping_residual,
)
from .symmetry import (
    UNITARY_J_SYMMETRIC,
    ConjugationSpec,
    classify_unitary_j_symmetric,
    conjugation_axioms,
    construct_symmetric,
    factor_symmetric,
    is_c_symmetric,
    transfer_residuals,
    unimodular_toeplitz_operator,
)

EXACT_TOL = 1e-12
BLOCK_UNITARY_TOL = 1e-8
RANDOM_CASES = 200

COMPACT_FORM = NormalFormJ(a0=0.2, a1=0.3, b=1.0)
COMPACT_P = 0.5


@dataclass
class CriterionOutcome:
    passed: bool
    details: dict = field(default_factory=dict)
    findings: list[str] = field(default_factory=list)


@dataclass
class CriterionResult:
    id: str
    passed: bool
    details: dict
    findings: list[str]
    error: Optional[str] = None
    skipped: bool = False

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "passed": self.passed,
            "skipped": self.skipped,
            "details": self.details,
            "findings": self.findings,
            "error": self.error,
        }


Criterion = Callable[[RunConfig], CriterionOutcome]


def _unitary_conjugations(cfg: RunConfig) -> CriterionOutcome:
    details = {}
    passed = True
    for p in (0.3, 0.5, 0.4 + 0.2j):
        axioms = conjugation_axioms(ConjugationSpec.weighted(p), cfg.wide_N, cfg.M)
        kind = classify_unitary_j_symmetric(psi_p(p), phi_p(p)).kind
        ok = axioms["symmetric"] < EXACT_TOL and axioms["unitary"] < BLOCK_UNITARY_TOL and kind == UNITARY_J_SYMMETRIC
        details[str(p)] = {**axioms, "kind": kind}
        passed = passed and ok
    return CriterionOutcome(passed, details)


def _weighted_construction(cfg: RunConfig) -> CriterionOutcome:
    conj = ConjugationSpec.weighted(COMPACT_P)
    psi_t, phi_t = construct_symmetric(conj, COMPACT_FORM)
    report = is_c_symmetric(weighted_composition_matrix(psi_t, phi_t, cfg.N), conj, cfg.M, cfg.tol)

    factor = factor_symmetric(psi_t, phi_t, conj)
    recovered = factor.normal_form
    round_trip = math.inf
    if recovered is not None:
        round_trip = max(
            abs(recovered.a0 - COMPACT_FORM.a0),
            abs(recovered.a1 - COMPACT_FORM.a1),
            abs(recovered.b - COMPACT_FORM.b),
        )

    rotated = ConjugationSpec.rotated(1j)
    psi_r, phi_r = construct_symmetric(rotated, COMPACT_FORM)
    rotation_report = is_c_symmetric(weighted_composition_matrix(psi_r, phi_r, cfg.N), rotated, cfg.M, cfg.tol)

    passed = report.verdict and factor.factorable and round_trip < 1e-10 and rotation_report.verdict
    return CriterionOutcome(
        passed,
        {
            "weightedResidual": report.residual,
            "roundTripError": round_trip if math.isfinite(round_trip) else None,
            "rotationResidual": rotation_report.residual,
        },
    )


def _cowen_adjoint(cfg: RunConfig) -> CriterionOutcome:
    maps = {
        "phi_p(0.5)": phi_p(0.5),
        "nf(0.2,0.3)": COMPACT_FORM.phi,
        "z/(2-z)": LFMap(1.0, 0.0, -1.0, 2.0),
    }
    details = {}
    for label, m in maps.items():
        details[label] = block_residual(adjoint(composition_matrix(m, cfg.N)), cowen_adjoint_matrix(m, cfg.N), cfg.M)
    return CriterionOutcome(all(value < cfg.tol for value in details.values()), details)


def _compact_spectrum(cfg: RunConfig) -> CriterionOutcome:
    psi_t, phi_t = construct_symmetric(ConjugationSpec.weighted(COMPACT_P), COMPACT_FORM)
    A = weighted_composition_matrix(psi_t, phi_t, cfg.N)
    prediction = predict_compact(COMPACT_FORM, COMPACT_P, cfg.m_max)
    comparison = compare_spectrum(eigenvalues(A), prediction, cfg.eigen_k, cfg.rel_tol)
    radii = gelfand_radius(A, 40)
    details = comparison.to_json()
    details["gelfand40"] = radii[-1]
    return CriterionOutcome(comparison.passed, details)


def _boundary_automorphisms(cfg: RunConfig) -> CriterionOutcome:
    parabolic_p = 0.5 + 0.5j
    m = phi_p(parabolic_p)
    parabolic_ok = (
        abs(evaluate(m, 1.0) - 1.0) < EXACT_TOL
        and abs(derivative(m, 1.0) - 1.0) < EXACT_TOL
        and classify_phi_p(parabolic_p).kind == PHI_P_PARABOLIC
    )

    hyperbolic_p = -0.5 + 0.5j
    m = phi_p(hyperbolic_p)
    classification = classify_phi_p(hyperbolic_p)
    expected = math.sin(3 * math.pi / 4)
    hyperbolic_ok = (
        abs(evaluate(m, -1.0) + 1.0) < EXACT_TOL
        and classification.kind == PHI_P_HYPERBOLIC
        and abs(classification.closed_form_derivative - expected) < EXACT_TOL
    )
    measured = abs(derivative(m, -1.0))
    findings = []
    if abs(measured - expected) > EXACT_TOL:
        findings.append(
            f"|phi_p'(-1)| for p={hyperbolic_p} is {measured:.12g}, not |sin(theta)| = {expected:.12g}; "
            "phi_p is parabolic at -1"
        )
    return CriterionOutcome(
        parabolic_ok and hyperbolic_ok,
        {
            "check": "closed-form reproduction",
            "closedFormDerivative": classification.closed_form_derivative,
            "measuredDerivative": measured,
        },
        findings,
    )


def _parabolic_spiral(cfg: RunConfig) -> CriterionOutcome:
    worst = 0.0
    for theta in (0.3, 0.6, 0.9, -0.4, -0.8):
        p = math.cos(theta) * cmath.exp(1j * theta)
        for t in (1.0, 0.5 + 0.25j):
            for psi0 in (1.0, 0.5j):
                prediction = predict_parabolic_spiral(NormalFormJ.parabolic(t, 1, psi0), p)
                worst = max(worst, prediction.parameters["boundary_value_gap"])
    reference = predict_parabolic_spiral(NormalFormJ.parabolic(1.0), 0.5 + 0.5j)
    passed = worst < EXACT_TOL and abs(reference.radius - 1.5) < EXACT_TOL
    return CriterionOutcome(passed, {"worstGap": worst, "radius": reference.radius})


def _disk(cfg: RunConfig) -> CriterionOutcome:
    worst = 0.0
    for theta in (2.0, 2.4, 3 * math.pi / 4, 2.8, -2.2):
        p = -math.cos(theta) * cmath.exp(1j * theta)
        for t in (1.0, 0.5):
            prediction = predict_disk(NormalFormJ.parabolic(t, -1), p)
            worst = max(worst, prediction.parameters["composite_derivative_gap"])
    reference = predict_disk(NormalFormJ.parabolic(1.0, -1), -0.5 + 0.5j)
    denjoy_wolff = reference.parameters["denjoy_wolff"]
    at_minus_one = denjoy_wolff is not None and abs(denjoy_wolff + 1.0) < 1e-9
    passed = worst < EXACT_TOL and abs(reference.radius - 1.783810) < 1e-5 and at_minus_one

    findings = []
    measured = reference.parameters["boundary_derivative"]
    if measured >= 1.0 - 1e-12:
        findings.append(
            f"|(phi o phi_p)'(-1)| = {measured:.12g}; the composite is parabolic at -1, "
            f"and the derivative-based radius is {reference.parameters['derivative_radius']:.12g}"
        )
    details = {
        "check": "closed-form reproduction",
        "worstGap": worst,
        "radius": reference.radius,
        "derivativeRadius": reference.parameters["derivative_radius"],
    }
    return CriterionOutcome(passed, details, findings)


def _j_form_radius(cfg: RunConfig) -> CriterionOutcome:
    plus = predict_j_form_radius(NormalFormJ.parabolic(1.0, 1)).radius
    minus = predict_j_form_radius(NormalFormJ.parabolic(1.0, -1)).radius
    interior = predict_j_form_radius(COMPACT_FORM, cfg.m_max)
    leading = eigenvalues(weighted_composition_matrix(COMPACT_FORM.psi, COMPACT_FORM.phi, cfg.N)).eigenvalues[0]
    gap = abs(abs(leading) - interior.radius) / interior.radius
    passed = abs(plus - 1.5) < EXACT_TOL and abs(minus - 0.75) < EXACT_TOL and gap < cfg.rel_tol
    return CriterionOutcome(passed, {"plusOne": plus, "minusOne": minus, "interiorGap": gap})


def _unimodular_toeplitz(cfg: RunConfig) -> CriterionOutcome:
    N = max(128, cfg.N)
    result = unimodular_toeplitz_operator(0.4, N, M=min(cfg.M, N // 4), tol=cfg.tol, phase_steps=360)
    M = result.report.M
    unitary_gap = result.unitary_gap
    passed = abs(result.symbol_norm - 1.0) < 1e-10 and result.skew_residual < cfg.tol
    findings = []
    if unitary_gap >= cfg.tol:
        findings.append(
            f"C_phi_p T_(|1-pz|/sqrt(1-p^2)) is not block-unitary (max|U*U - I| = {unitary_gap:.3e} on the "
            f"{M}x{M} block); the gap does not shrink with N"
        )
    best = float(result.phase_residuals.min())
    if best >= cfg.tol:
        findings.append(
            f"T_(p-z)/|1-pz| is not symmetric for any tested phase c (best residual {best:.3e}); "
            f"it satisfies C T C = -T with skew residual {result.skew_residual:.3e}"
        )
    return CriterionOutcome(
        passed,
        {
            "symbolNorm": result.symbol_norm,
            "symmetricResidual": result.report.residual,
            "skewResidual": result.skew_residual,
            "unitaryPartGap": unitary_gap,
            "unitaryPartBlockUnitary": unitary_gap < cfg.tol,
        },
        findings,
    )


def _rotation_spectrum(cfg: RunConfig) -> CriterionOutcome:
    psi_t, phi_t = construct_symmetric(ConjugationSpec.rotated(1j), COMPACT_FORM)
    A = weighted_composition_matrix(psi_t, phi_t, cfg.N)
    comparison = compare_spectrum(eigenvalues(A), predict_rotation(1j, COMPACT_FORM, cfg.m_max), cfg.eigen_k, cfg.rel_tol)
    reduced = predict_rotation(1.0, COMPACT_FORM, cfg.m_max).points
    direct = predict_j_form_radius(COMPACT_FORM, cfg.m_max).points
    reduction_gap = float(np.abs(reduced - direct).max())
    passed = comparison.passed and reduction_gap < EXACT_TOL
    return CriterionOutcome(passed, {"comparison": comparison.to_json(), "reductionGap": reduction_gap})


def _conjugation_grid(cfg: RunConfig) -> CriterionOutcome:
    specs = [
        ConjugationSpec.weighted(radius * cmath.exp(1j * angle))
        for radius in (0.2, 0.4, 0.6)
        for angle in (0.0, math.pi / 4, math.pi / 2)
    ]
    rng = np.random.default_rng(cfg.seed + 3)
    for _ in range(RANDOM_CASES):
        p = 0.6 * math.sqrt(rng.uniform(0.01, 1.0)) * cmath.exp(2j * math.pi * rng.uniform())
        specs.append(ConjugationSpec.weighted(p, cmath.exp(2j * math.pi * rng.uniform())))
    worst = {"symmetric": 0.0, "unitary": 0.0, "involution": 0.0}
    for spec in specs:
        axioms = conjugation_axioms(spec, cfg.wide_N, cfg.M)
        worst = {key: max(worst[key], axioms[key]) for key in worst}
    passed = worst["symmetric"] < EXACT_TOL and worst["unitary"] < BLOCK_UNITARY_TOL and worst["involution"] < BLOCK_UNITARY_TOL
    return CriterionOutcome(passed, {**worst, "cases": len(specs)})


def random_j_form(rng: np.random.Generator) -> NormalFormJ:
    a0 = 0.5 * math.sqrt(rng.uniform()) * cmath.exp(2j * math.pi * rng.uniform())
    room = 0.9 * (1.0 - abs(a0)) ** 2
    a1 = room * math.sqrt(rng.uniform(0.05, 1.0)) * cmath.exp(2j * math.pi * rng.uniform())
    b = complex(rng.normal(), rng.normal())
    return NormalFormJ(a0, a1, b)


def random_self_map(rng: np.random.Generator) -> LFMap:
    """(a z + b) / (c z + 1) with |a| + |b| < 1 - |c|, so the image lies inside the disk."""
    c = 0.5 * rng.uniform() * cmath.exp(2j * math.pi * rng.uniform())
    budget = 0.9 * (1.0 - abs(c))
    split = rng.uniform(0.1, 0.9)
    a = budget * split * cmath.exp(2j * math.pi * rng.uniform())
    b = budget * (1.0 - split) * rng.uniform() * cmath.exp(2j * math.pi * rng.uniform())
    return LFMap(a, b, c, 1.0)


def _unitary_transfer(cfg: RunConfig) -> CriterionOutcome:
    rng = np.random.default_rng(cfg.seed)
    worst_before = worst_after = 0.0
    for _ in range(RANDOM_CASES):
        nf = random_j_form(rng)
        p = 0.6 * math.sqrt(rng.uniform(0.01, 1.0)) * cmath.exp(2j * math.pi * rng.uniform())
        A = weighted_composition_matrix(nf.psi, nf.phi, cfg.wide_N)
        U = ConjugationSpec.weighted(p).realize(cfg.wide_N)
        before, after = transfer_residuals(U, A, cfg.M)
        scale = max(1.0, float(np.abs(A.entries).max()))
        worst_before = max(worst_before, before / scale)
        worst_after = max(worst_after, after / scale)
    passed = worst_before < EXACT_TOL and worst_after < cfg.tol
    return CriterionOutcome(passed, {"before": worst_before, "after": worst_after, "cases": RANDOM_CASES})


def _spectral_mapping(cfg: RunConfig) -> CriterionOutcome:
    rng = np.random.default_rng(cfg.seed + 1)
    worst = 0.0
    for _ in range(RANDOM_CASES):
        n = int(rng.integers(4, 25))
        A = OpMatrix((rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(n))
        worst = max(worst, spectral_mapping_residual(A))
    return CriterionOutcome(worst < 1e-8, {"worst": worst})


def fixed_point_duality_gap(m: LFMap) -> Optional[float]:
    """Gap between the fixed points of the Cowen map and the reflections of those of ``m``."""
    own, _ = fixed_points(m)
    dual, _ = fixed_points(cowen_triple(m).sigma)
    if len(own) != len(dual) or any(math.isinf(abs(z)) or abs(z) < 1e-6 for z in list(own) + list(dual)):
        return None
    reflected = np.array([1.0 / np.conj(z) for z in own])
    dual = np.asarray(dual)
    cost = np.abs(reflected[:, None] - dual[None, :]) / np.maximum(np.abs(dual[None, :]), 1.0)
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _fixed_point_duality(cfg: RunConfig) -> CriterionOutcome:
    rng = np.random.default_rng(cfg.seed + 2)
    worst = 0.0
    checked = 0
    for _ in range(RANDOM_CASES):
        gap = fixed_point_duality_gap(random_self_map(rng))
        if gap is None:
            continue
        checked += 1
        worst = max(worst, gap)
    return CriterionOutcome(checked > 0 and worst < 1e-8, {"worst": worst, "checked": checked})


CRITERIA: dict[str, Criterion] = {
    "01-unitary-conjugations": _unitary_conjugations,
    "02-weighted-construction": _weighted_construction,
    "03-cowen-adjoint": _cowen_adjoint,
    "04-compact-spectrum": _compact_spectrum,
    "05-boundary-automorphisms": _boundary_automorphisms,
    "06-parabolic-spiral": _parabolic_spiral,
    "07-disk": _disk,
    "08-j-form-radius": _j_form_radius,
    "09-unimodular-toeplitz": _unimodular_toeplitz,
    "10-rotation-spectrum": _rotation_spectrum,
    "11a-conjugation-grid": _conjugation_grid,
    "11b-unitary-transfer": _unitary_transfer,
    "11c-spectral-mapping": _spectral_mapping,
    "11d-fixed-point-duality": _fixed_point_duality,
}


def _run_one(criterion_id: str, criterion: Criterion, cfg: RunConfig, logger: logging.Logger) -> CriterionResult:
    try:
        outcome = criterion(cfg)
    except Exception as exc:  # noqa: BLE001
        logger.exception("Criterion crashed", extra={"criterion": criterion_id})
        return CriterionResult(criterion_id, False, {}, [], error=f"{type(exc).__name__}: {exc}")
    level = logging.INFO if outcome.passed else logging.WARNING
    logger.log(level, "Criterion %s %s", criterion_id, "passed" if outcome.passed else "failed", extra={"criterion": criterion_id})
    return CriterionResult(criterion_id, bool(outcome.passed), outcome.details, outcome.findings)


def run_suite(
    cfg: RunConfig,
    criteria: Optional[dict[str, Criterion]] = None,
    stop_event: Optional[threading.Event] = None,
    logger: Optional[logging.Logger] = None,
) -> list[CriterionResult]:
    """Run every criterion on ``cfg.workers`` threads; results come back ordered by id."""
    logger = logger or logging.getLogger(__name__)
    criteria = criteria if criteria is not None else CRITERIA
    stop_event = stop_event or threading.Event()
    pending = sorted(criteria)
    results: dict[str, CriterionResult] = {}
    lock = threading.Lock()

    def worker() -> None:
        while not stop_event.is_set():
            with lock:
                if not pending:
                    return
                criterion_id = pending.pop(0)
            result = _run_one(criterion_id, criteria[criterion_id], cfg, logger)
            with lock:
                results[criterion_id] = result

    threads = [threading.Thread(target=worker, daemon=True) for _ in range(min(cfg.workers, len(pending)) or 1)]
    for thread in threads:
        thread.start()
    for thread in threads:
        thread.join()
    for criterion_id in pending:
        logger.warning("Criterion %s skipped after stop request", criterion_id, extra={"criterion": criterion_id})
        results[criterion_id] = CriterionResult(criterion_id, False, {}, [], error="stopped before running", skipped=True)
    return [results[key] for key in sorted(results)]


def summarize(results: list[CriterionResult]) -> dict:
    failed = [result.id for result in results if not result.passed]
    return {
        "passed": bool(results) and not failed,
        "firstFailure": failed[0] if failed else None,
        "skipped": [result.id for result in results if result.skipped],
        "criteria": [result.to_json() for result in results],
        "findings": [finding for result in results for finding in result.findings],
    }
