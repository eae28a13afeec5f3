from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .hardy import OpMatrix
from .moebius import (
    PARABOLIC,
    PHI_P_HYPERBOLIC,
    PHI_P_PARABOLIC,
    LFMap,
    MoebiusError,
    NormalFormJ,
    analyze,
    classify_phi_p,
    compose,
    derivative,
    fixed_points,
    is_automorphism,
    is_identity,
    phi_p,
    psi_p,
    translation_number,
)
from .series import Rational
from .symmetry import ConjugationSpec, construct_symmetric

logger = logging.getLogger(__name__)

POINT_SET = "point-set"
SPIRAL = "spiral"
DISK = "disk"
RADIUS = "radius"

MAX_EIGEN_ORDER = 512
MAX_GELFAND_STEPS = 64

_BOUNDARY_GAP = 1e-10
_POWER_ITERATIONS = 30
_SPIRAL_SAMPLES = 64
_DISK_SAMPLES = 64


class HypothesisViolation(RuntimeError):
    def __init__(self, condition: str) -> None:
        super().__init__(condition)
        self.condition = condition


class KindMismatchError(ValueError):
    pass


class EigenError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SpectrumPrediction:
    kind: str
    radius: float
    points: np.ndarray
    parameters: dict = field(default_factory=dict)

    def nonzero_points(self) -> np.ndarray:
        points = self.points[np.abs(self.points) > 0.0]
        order = np.lexsort((np.angle(points), -np.abs(points)))
        return points[order]

    def to_json(self) -> dict:
        params = {
            key: [value.real, value.imag] if isinstance(value, complex) else value
            for key, value in self.parameters.items()
        }
        return {
            "kind": self.kind,
            "radius": self.radius,
            "points": [[z.real, z.imag] for z in self.points],
            "parameters": params,
        }


@dataclass(frozen=True, eq=False)
class EigenResult:
    eigenvalues: np.ndarray
    backward_errors: np.ndarray
    converged: bool = True

    def leading(self, k: int) -> np.ndarray:
        return self.eigenvalues[:k]


@dataclass(frozen=True)
class MatchedPair:
    predicted: complex
    eigenvalue: complex
    rel_err: float


@dataclass(frozen=True, eq=False)
class SpectrumComparison:
    prediction: SpectrumPrediction
    leading: np.ndarray
    pairs: tuple[MatchedPair, ...]
    passed: bool

    def to_json(self) -> dict:
        return {
            "prediction": self.prediction.to_json(),
            "eigen": {"leading": [[z.real, z.imag] for z in self.leading]},
            "pairs": [
                {"pred": [pair.predicted.real, pair.predicted.imag], "eig": [pair.eigenvalue.real, pair.eigenvalue.imag], "rel_err": pair.rel_err}
                for pair in self.pairs
            ],
            "pass": self.passed,
        }


def _sort_spectrum(values: np.ndarray) -> np.ndarray:
    return np.lexsort((np.angle(values), -np.abs(values)))


def eigenvalues(A: OpMatrix) -> EigenResult:
    if A.N > MAX_EIGEN_ORDER:
        raise EigenError(f"dense eigensolve is limited to N <= {MAX_EIGEN_ORDER}, got {A.N}")
    try:
        values, vectors = scipy.linalg.eig(A.entries)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        logger.warning("Eigensolver did not converge", extra={"N": A.N, "error": str(exc)})
        return EigenResult(np.zeros(0, dtype=complex), np.zeros(0), converged=False)

    order = _sort_spectrum(values)
    values = values[order]
    vectors = vectors[:, order]
    residuals = A.entries @ vectors - vectors * values
    norms = np.linalg.norm(vectors, axis=0)
    backward = np.linalg.norm(residuals, axis=0) / np.where(norms > 0, norms, 1.0)
    return EigenResult(values.astype(complex), backward)


def is_power_compact(phi: LFMap) -> bool:
    """True when some iterate of ``phi`` maps the closed disk into the open disk."""
    if is_identity(phi) or is_automorphism(phi):
        return False
    points, _ = fixed_points(phi)
    return all(math.isinf(abs(z)) or abs(abs(z) - 1.0) > _BOUNDARY_GAP for z in points)


def _interior_fixed_point(phi: LFMap) -> complex:
    points, _ = fixed_points(phi)
    inside = [z for z in points if not math.isinf(abs(z)) and abs(z) < 1.0]
    if not inside:
        raise HypothesisViolation("the map has no fixed point in the open disk")
    return min(inside, key=abs)


def predict_point_set(psi: Rational, phi: LFMap, m_max: int = 8, parameters: Optional[dict] = None) -> SpectrumPrediction:
    """{psi(w) phi'(w)^m : m = 0..m_max} plus 0, for the interior fixed point w."""
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    if not is_power_compact(phi):
        raise HypothesisViolation("the composite map has a fixed point on the unit circle")
    w = _interior_fixed_point(phi)
    lead = complex(psi(w))
    ratio = derivative(phi, w)
    points = np.append(lead * ratio ** np.arange(m_max + 1), 0j)
    params = {"w": w, "derivative": ratio}
    params.update(parameters or {})
    return SpectrumPrediction(POINT_SET, abs(lead), points, params)


def _constant_prediction(psi_t: Rational, w: complex, parameters: dict) -> SpectrumPrediction:
    lead = complex(psi_t(w))
    params = {"w": w, "derivative": 0j}
    params.update(parameters)
    return SpectrumPrediction(POINT_SET, abs(lead), np.array([lead, 0j]), params)


def predict_compact(nf: NormalFormJ, p: complex, m_max: int = 8, c: complex = 1.0) -> SpectrumPrediction:
    p = complex(p)
    conj = ConjugationSpec.weighted(p, c)
    if nf.is_constant:
        # constant symbol: composite is rank one with range spanned by psi_t
        psi_t = psi_p(p, c) * nf.psi.compose(phi_p(p))
        return _constant_prediction(psi_t, nf.a0, {"p": p})
    psi_t, phi_t = construct_symmetric(conj, nf)
    return predict_point_set(psi_t, phi_t, m_max, {"p": p})


def _default_b_grid(rate: float) -> np.ndarray:
    b_max = 8.0 / rate
    return np.concatenate(([0.0], np.geomspace(b_max * 1e-3, b_max, _SPIRAL_SAMPLES - 1)))


def _require_boundary_parabolic(phi: LFMap, zeta: float) -> None:
    analysis = analyze(phi)
    if analysis.map_class.tag != PARABOLIC or abs(analysis.boundary_fixed_point - zeta) > 1e-9:
        raise HypothesisViolation(f"the symbol is not parabolic with fixed point {zeta:+.0f}")


def predict_parabolic_spiral(nf: NormalFormJ, p: complex, b_grid: Optional[Sequence[float]] = None) -> SpectrumPrediction:
    p = complex(p)
    if classify_phi_p(p).kind != PHI_P_PARABOLIC:
        raise HypothesisViolation("phi_p is not parabolic with fixed point 1")
    phi, psi = nf.phi, nf.psi
    _require_boundary_parabolic(phi, 1.0)
    automorphism = phi_p(p)
    if is_automorphism(compose(phi, automorphism)):
        raise HypothesisViolation("the composite symbol is an automorphism")

    t = translation_number(phi, 1.0)
    t_tilde = translation_number(automorphism, 1.0)
    rate = (t + t_tilde).real
    if rate <= 0.0:
        raise HypothesisViolation("Re(t + t~) must be positive")

    prefactor = nf.b * math.sqrt(1.0 - abs(p) ** 2) * (2 + t) / (2 * (1 - p.conjugate()))
    boundary_value = complex(psi_p(p)(1.0) * psi(1.0))
    grid = np.asarray(b_grid if b_grid is not None else _default_b_grid(rate), dtype=float)
    if grid.size and grid.min() < 0.0:
        raise ValueError("spiral samples need b >= 0")
    if not np.any(grid == 0.0):
        grid = np.concatenate(([0.0], grid))
    samples = prefactor * np.exp(-grid * (t + t_tilde))
    points = np.append(samples, 0j)
    radius = abs(prefactor)
    logger.debug("Parabolic spiral prediction", extra={"p": p, "t": t, "radius": radius})
    return SpectrumPrediction(
        SPIRAL,
        radius,
        points,
        {
            "p": p,
            "t": t,
            "t_tilde": t_tilde,
            "closed_form_radius": abs(prefactor),
            "boundary_value_gap": abs(prefactor - boundary_value),
        },
    )


def predict_disk(nf: NormalFormJ, p: complex) -> SpectrumPrediction:
    p = complex(p)
    classification = classify_phi_p(p)
    if classification.kind != PHI_P_HYPERBOLIC:
        raise HypothesisViolation("phi_p does not fix -1")
    phi = nf.phi
    _require_boundary_parabolic(phi, -1.0)
    automorphism = phi_p(p)
    composite = compose(phi, automorphism)
    if is_automorphism(composite):
        raise HypothesisViolation("the composite symbol is an automorphism")

    t = translation_number(phi, -1.0)
    scale = abs(2 + t) / (2 * abs(1 + p.conjugate()))
    radius = scale * math.sqrt((1.0 - abs(p) ** 2) / classification.closed_form_derivative)
    measured = abs(classification.derivative_at_boundary)
    derivative_radius = scale * math.sqrt((1.0 - abs(p) ** 2) / measured)
    chain_gap = abs(derivative(composite, -1.0) - classification.derivative_at_boundary)
    try:
        denjoy_wolff = analyze(composite).denjoy_wolff
    except MoebiusError:
        denjoy_wolff = None

    angles = np.exp(2j * np.pi * np.arange(_DISK_SAMPLES) / _DISK_SAMPLES)
    points = np.append(radius * angles, 0j)
    return SpectrumPrediction(
        DISK,
        radius,
        points,
        {
            "p": p,
            "t": t,
            "closed_form_derivative": classification.closed_form_derivative,
            "boundary_derivative": measured,
            "derivative_radius": derivative_radius,
            "composite_derivative_gap": chain_gap,
            "denjoy_wolff": denjoy_wolff,
        },
    )


def predict_j_form_radius(nf: NormalFormJ, m_max: int = 8) -> SpectrumPrediction:
    psi = nf.psi
    if nf.is_constant:
        return _constant_prediction(psi, nf.a0, {})
    phi = nf.phi
    if is_automorphism(phi):
        raise HypothesisViolation("the symbol is an automorphism")
    analysis = analyze(phi)
    w = analysis.denjoy_wolff
    if w is None:
        raise HypothesisViolation("the symbol has no Denjoy-Wolff point")
    if abs(w) < 1.0 - 1e-9:
        if is_power_compact(phi):
            return predict_point_set(psi, phi, m_max)
        value = complex(psi(w))
        return SpectrumPrediction(RADIUS, abs(value), np.array([value]), {"w": w})

    t = analysis.translation_number
    if abs(w - 1.0) < 1e-9:
        value = nf.b * (2 + t) / 2
    elif abs(w + 1.0) < 1e-9:
        value = nf.b * (2 + t) / (2 + 2 * t)
    else:
        raise HypothesisViolation(f"J-form Denjoy-Wolff point {w} is not +1 or -1")
    return SpectrumPrediction(RADIUS, abs(value), np.array([value]), {"w": w, "t": t})


def predict_rotation(lam: complex, nf: NormalFormJ, m_max: int = 8) -> SpectrumPrediction:
    lam = complex(lam)
    if is_automorphism(nf.phi):
        raise HypothesisViolation("the symbol is an automorphism")
    psi_t, phi_t = construct_symmetric(ConjugationSpec.rotated(lam), nf)
    if not is_power_compact(phi_t):
        raise HypothesisViolation("phi(lam z) has a fixed point on the unit circle")
    return predict_point_set(psi_t, phi_t, m_max, {"lambda": lam})


def gelfand_radius(A: OpMatrix, n_max: int) -> list[float]:
    """(||A^n||_2)^(1/n) for n = 1..n_max with per-step rescaling."""
    if not 1 <= n_max <= MAX_GELFAND_STEPS:
        raise ValueError(f"n_max must lie in 1..{MAX_GELFAND_STEPS}")
    power = np.eye(A.N, dtype=complex)
    log_scale = 0.0
    sequence: list[float] = []
    start = np.ones(A.N, dtype=complex) / math.sqrt(A.N)
    for n in range(1, n_max + 1):
        power = A.entries @ power
        size = np.linalg.norm(power)
        if size == 0.0:
            sequence.extend([0.0] * (n_max - n + 1))
            break
        power /= size
        log_scale += math.log(size)

        vector = start
        sigma = 0.0
        for _ in range(_POWER_ITERATIONS):
            image = power.conj().T @ (power @ vector)
            length = np.linalg.norm(image)
            if length == 0.0:
                break
            vector = image / length
            sigma = math.sqrt(length)
        if sigma == 0.0:
            sequence.append(0.0)
            continue
        sequence.append(math.exp((math.log(sigma) + log_scale) / n))
    return sequence


def _modulus_order(values: np.ndarray, rel_tol: float) -> np.ndarray:
    """Sort by decreasing modulus; moduli equal within rel_tol fall back to argument in [0, 2pi)."""
    values = np.asarray(values, dtype=complex)
    moduli = np.abs(values)
    args = np.mod(np.angle(values), 2 * math.pi)
    args[args > 2 * math.pi - 1e-9] = 0.0
    ordered: list[int] = []
    group: list[int] = []
    for index in np.argsort(-moduli, kind="stable"):
        if group and moduli[group[0]] - moduli[index] > rel_tol * moduli[group[0]]:
            ordered.extend(sorted(group, key=lambda i: args[i]))
            group = []
        group.append(int(index))
    ordered.extend(sorted(group, key=lambda i: args[i]))
    return values[ordered]


def compare_spectrum(eig: EigenResult, pred: SpectrumPrediction, k: int, rel_tol: float) -> SpectrumComparison:
    if pred.kind not in (POINT_SET,):
        raise KindMismatchError(f"eigenvalue matching needs a point-set prediction, got {pred.kind}")
    leading = eig.leading(k)
    targets = _modulus_order(pred.nonzero_points(), rel_tol)
    values = _modulus_order(leading, rel_tol)
    pairs = [
        MatchedPair(complex(target), complex(value), abs(value - target) / abs(target))
        for value, target in zip(values, targets)
    ]
    passed = bool(pairs) and len(pairs) == min(k, len(leading)) and all(pair.rel_err <= rel_tol for pair in pairs)
    logger.info(
        "Spectrum comparison",
        extra={"k": k, "passed": passed, "worst": max((pair.rel_err for pair in pairs), default=math.inf)},
    )
    return SpectrumComparison(pred, leading, tuple(pairs), passed)


def spectral_mapping_residual(A: OpMatrix) -> float:
    """Normwise relative gap between eig(A^2) and {l^2 : l in eig(A)} under optimal matching."""
    squares = eigenvalues(A).eigenvalues ** 2
    direct = eigenvalues(A @ A).eigenvalues
    if squares.size != direct.size:
        raise EigenError("eigensolver did not converge")
    cost = np.abs(direct[:, None] - squares[None, :])
    rows, cols = linear_sum_assignment(cost)
    scale = max(float(np.abs(direct).max(initial=0.0)), 1e-300)
    return float(cost[rows, cols].max(initial=0.0) / scale)
