"""Conjugations and complex-symmetry checks for weighted composition operators.

A conjugation is represented by a symmetric unitary matrix ``W`` acting as
``v -> W @ conj(v)``.  An operator matrix ``A`` is symmetric with respect to it
exactly when ``A @ W == W @ A.T``; every check in this module reduces to that
identity on a leading block.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hardy import (
    CircleSymbol,
    DimensionError,
    OpMatrix,
    adjoint,
    composition_matrix,
    default_resolution,
    symbol_coefficients,
    toeplitz_matrix_symbol,
    weighted_composition_matrix,
)
from .moebius import (
    LFMap,
    MoebiusError,
    NormalFormJ,
    NotJFormError,
    compose,
    equivalent,
    evaluate,
    inverse,
    is_automorphism,
    phi_p,
    psi_p,
    rotation,
    to_j_normal_form,
)
from .series import Rational

logger = logging.getLogger(__name__)

VARIANT_J = "J"
VARIANT_WEIGHTED = "WeightedJ"
VARIANT_ROTATION = "RotJ"

UNITARY_J_SYMMETRIC = "unitary-J-symmetric"
UNITARY_J_SYMMETRIC_ROTATION = "unitary-J-symmetric-rotation"
NOT_UNITARY_J_SYMMETRIC = "not"

UNITARY_WITH_CONJUGATION = "unitary-with-conjugation"
NOT_ISOMETRY = "not-isometry"
ISOMETRY_NOT_CS = "isometry-but-not-CS-impossible"

_MATCH_TOL = 1e-10


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class ConjugationSpec:
    variant: str
    p: complex = 0j
    c: complex = 1 + 0j
    lam: complex = 1 + 0j

    def __post_init__(self) -> None:
        for name in ("p", "c", "lam"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.variant not in (VARIANT_J, VARIANT_WEIGHTED, VARIANT_ROTATION):
            raise SymmetryError(f"unknown conjugation variant {self.variant!r}")
        if self.variant == VARIANT_WEIGHTED:
            if self.p == 0 or abs(self.p) >= 1.0:
                raise SymmetryError(f"p must lie in the punctured disk, got {self.p}")
            if abs(abs(self.c) - 1.0) > 1e-12:
                raise SymmetryError(f"c must be unimodular, got {self.c}")
        if self.variant == VARIANT_ROTATION and abs(abs(self.lam) - 1.0) > 1e-12:
            raise SymmetryError(f"rotation factor must be unimodular, got {self.lam}")

    @classmethod
    def j(cls) -> "ConjugationSpec":
        return cls(VARIANT_J)

    @classmethod
    def weighted(cls, p: complex, c: complex = 1.0) -> "ConjugationSpec":
        return cls(VARIANT_WEIGHTED, p=p, c=c)

    @classmethod
    def rotated(cls, lam: complex) -> "ConjugationSpec":
        return cls(VARIANT_ROTATION, lam=lam)

    def realize(self, N: int) -> OpMatrix:
        if self.variant == VARIANT_J:
            return OpMatrix(np.eye(N, dtype=complex))
        if self.variant == VARIANT_ROTATION:
            return OpMatrix(np.diag(self.lam ** np.arange(N)))
        return weighted_composition_matrix(psi_p(self.p, self.c), phi_p(self.p), N)

    def apply(self, v: np.ndarray, W: Optional[OpMatrix] = None) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        W = W if W is not None else self.realize(v.size)
        return W.entries @ np.conj(v)

    def to_json(self) -> dict:
        return {
            "variant": self.variant,
            "p": [self.p.real, self.p.imag],
            "c": [self.c.real, self.c.imag],
            "lambda": [self.lam.real, self.lam.imag],
        }


@dataclass(frozen=True)
class SymmetryReport:
    residual: float
    N: int
    M: int
    tolerance: float
    conjugation: Optional[ConjugationSpec] = None

    @property
    def verdict(self) -> bool:
        return self.residual < self.tolerance

    def to_json(self) -> dict:
        conj = self.conjugation or ConjugationSpec.j()
        payload = conj.to_json()
        payload.update({"N": self.N, "M": self.M, "residual": self.residual, "tol": self.tolerance, "verdict": self.verdict})
        return payload


def _check_block(N: int, M: int) -> None:
    if not 1 <= M <= N // 2:
        raise DimensionError(f"block size {M} must satisfy 1 <= M <= N/2 = {N // 2}")


def symmetry_residual(A: OpMatrix, W: OpMatrix, M: int) -> float:
    """max |A W - W A^T| over the leading M x M block."""
    if A.N != W.N:
        raise DimensionError(f"dimension mismatch: {A.N} vs {W.N}")
    _check_block(A.N, M)
    gap = A.entries @ W.entries - W.entries @ A.entries.T
    return float(np.abs(gap[:M, :M]).max())


def skew_residual(A: OpMatrix, W: OpMatrix, M: int) -> float:
    """max |W A^T + A^H W| over the leading block; zero when C A* C = -A*."""
    if A.N != W.N:
        raise DimensionError(f"dimension mismatch: {A.N} vs {W.N}")
    _check_block(A.N, M)
    gap = W.entries @ A.entries.T + A.entries.conj().T @ W.entries
    return float(np.abs(gap[:M, :M]).max())


def is_c_symmetric(A: OpMatrix, conj: ConjugationSpec, M: int, tol: float, W: Optional[OpMatrix] = None) -> SymmetryReport:
    W = W if W is not None else conj.realize(A.N)
    residual = symmetry_residual(A, W, M)
    report = SymmetryReport(residual=residual, N=A.N, M=M, tolerance=tol, conjugation=conj)
    logger.debug(
        "Complex symmetry check",
        extra={"variant": conj.variant, "N": A.N, "M": M, "residual": residual},
    )
    return report


def conjugation_axioms(conj: ConjugationSpec, N: int, M: int) -> dict[str, float]:
    W = conj.realize(N)
    entries = W.entries
    identity_block = np.eye(M)
    unitary = entries.conj().T @ entries
    involution = entries @ entries.conj()
    return {
        "symmetric": float(np.abs(entries - entries.T).max()),
        "unitary": float(np.abs(unitary[:M, :M] - identity_block).max()),
        "involution": float(np.abs(involution[:M, :M] - identity_block).max()),
    }


def transfer_residuals(U: OpMatrix, A: OpMatrix, M: int) -> tuple[float, float]:
    """Residual of A against J, and of U A against the conjugation U J."""
    identity_matrix = OpMatrix(np.eye(A.N, dtype=complex))
    return symmetry_residual(A, identity_matrix, M), symmetry_residual(U @ A, U, M)


def split_symmetric(A: OpMatrix, U: OpMatrix, M: int) -> tuple[OpMatrix, float]:
    """Write a U J-symmetric A as U (U^H A) and return the factor with its J residual."""
    factor = adjoint(U) @ A
    residual = float(np.abs(factor.block(M) - factor.block(M).T).max())
    return factor, residual


@dataclass(frozen=True)
class UnitaryJClass:
    kind: str
    p: Optional[complex] = None
    c: Optional[complex] = None
    mu: Optional[complex] = None
    lam: Optional[complex] = None


def _match_rotation(psi: Rational, phi: LFMap) -> Optional[tuple[complex, complex]]:
    if abs(phi.b) > _MATCH_TOL * abs(phi.d) or abs(phi.c) > _MATCH_TOL * abs(phi.d):
        return None
    lam = phi.a / phi.d
    if abs(abs(lam) - 1.0) > _MATCH_TOL or not psi.is_constant(_MATCH_TOL):
        return None
    mu = complex(psi(0.0))
    if abs(abs(mu) - 1.0) > _MATCH_TOL:
        return None
    return mu, lam


def _match_weight(psi: Rational, p: complex) -> Optional[complex]:
    c = complex(psi(0.0)) / math.sqrt(1.0 - abs(p) ** 2)
    if abs(abs(c) - 1.0) > 1e-9:
        return None
    c = c / abs(c)
    if psi.cross_residual(psi_p(p, c)) > _MATCH_TOL:
        return None
    return c


def classify_unitary_j_symmetric(psi: Rational, phi: LFMap) -> UnitaryJClass:
    rotation_match = _match_rotation(psi, phi)
    if rotation_match is not None:
        mu, lam = rotation_match
        return UnitaryJClass(UNITARY_J_SYMMETRIC_ROTATION, mu=mu, lam=lam)
    try:
        p = evaluate(phi, 0.0).conjugate()
    except MoebiusError:
        return UnitaryJClass(NOT_UNITARY_J_SYMMETRIC)
    if p == 0 or abs(p) >= 1.0 or not equivalent(phi, phi_p(p), tol=_MATCH_TOL):
        return UnitaryJClass(NOT_UNITARY_J_SYMMETRIC)
    c = _match_weight(psi, p)
    if c is None:
        return UnitaryJClass(NOT_UNITARY_J_SYMMETRIC)
    return UnitaryJClass(UNITARY_J_SYMMETRIC, p=p, c=c)


def construct_symmetric(conj: ConjugationSpec, nf: NormalFormJ) -> tuple[Rational, LFMap]:
    if conj.variant == VARIANT_J:
        raise SymmetryError("the J conjugation needs no construction; use the normal form directly")
    if nf.is_constant:
        raise SymmetryError("the normal form has a1 = 0 and no linear-fractional symbol")
    psi, phi = nf.psi, nf.phi
    if conj.variant == VARIANT_ROTATION:
        return psi.scaled_argument(conj.lam), compose(phi, rotation(conj.lam))
    automorphism = phi_p(conj.p)
    return psi_p(conj.p, conj.c) * psi.compose(automorphism), compose(phi, automorphism)


@dataclass(frozen=True, eq=False)
class Factorization:
    psi: Rational
    phi: LFMap
    factorable: bool
    residual: float
    normal_form: Optional[NormalFormJ] = None


def factor_symmetric(psi_t: Rational, phi_t: LFMap, conj: ConjugationSpec, N: int = 32, tol: float = 1e-10) -> Factorization:
    """Split off the conjugation's unitary factor and test the remainder for J-symmetry."""
    if conj.variant == VARIANT_J:
        raise SymmetryError("factorization needs a WeightedJ or RotJ conjugation")
    if conj.variant == VARIANT_ROTATION:
        back = rotation(conj.lam.conjugate())
        psi, phi = psi_t.scaled_argument(conj.lam.conjugate()), compose(phi_t, back)
    else:
        back = inverse(phi_p(conj.p))
        psi = (psi_t / psi_p(conj.p, conj.c)).compose(back)
        phi = compose(phi_t, back)

    try:
        normal_form: Optional[NormalFormJ] = to_j_normal_form(psi, phi, tol=tol)
    except NotJFormError as exc:
        logger.info("Factor is not of J-form", extra={"residual": exc.residual})
        normal_form = None

    try:
        A = weighted_composition_matrix(psi, phi, N)
        residual = float(np.abs(A.entries - A.entries.T).max())
    except ValueError as exc:
        logger.info("Factor has no bounded matrix", extra={"error": str(exc)})
        return Factorization(psi, phi, False, math.inf, normal_form)

    scale = max(1.0, float(np.abs(A.entries).max()))
    factorable = normal_form is not None and residual <= 1e-9 * scale
    return Factorization(psi, phi, factorable, residual, normal_form)


@dataclass(frozen=True)
class IsometryCheck:
    verdict: str
    conjugation: Optional[ConjugationSpec]
    isometry_residual: float
    coisometry_residual: float
    symmetry_residual: Optional[float] = None
    decomposition_residual: Optional[float] = None
    gamma: Optional[complex] = None


def check_isometry(psi: Rational, phi: LFMap, N: int, M: int, tol: float = 1e-6) -> IsometryCheck:
    A = weighted_composition_matrix(psi, phi, N)
    identity_block = np.eye(M)
    iso = float(np.abs((A.entries.conj().T @ A.entries)[:M, :M] - identity_block).max())
    coiso = float(np.abs((A.entries @ A.entries.conj().T)[:M, :M] - identity_block).max())
    if iso > tol:
        return IsometryCheck(NOT_ISOMETRY, None, iso, coiso)

    rotation_match = _match_rotation(psi, phi)
    if rotation_match is not None:
        conj = ConjugationSpec.j()
        report = is_c_symmetric(A, conj, M, tol)
        return IsometryCheck(UNITARY_WITH_CONJUGATION, conj, iso, coiso, report.residual, 0.0, rotation_match[1])

    if not is_automorphism(phi):
        return IsometryCheck(ISOMETRY_NOT_CS, None, iso, coiso)
    p = evaluate(inverse(phi), 0.0)
    lam = evaluate(phi, 0.0) / p
    c = _match_weight(psi, p)
    if c is None or abs(abs(lam) - 1.0) > 1e-9:
        return IsometryCheck(ISOMETRY_NOT_CS, None, iso, coiso)

    conj = ConjugationSpec.weighted(p, c)
    W = conj.realize(N)
    gamma = lam * p / p.conjugate()
    product = W @ OpMatrix(np.diag(gamma ** np.arange(N)))
    decomposition = float(np.abs(A.entries - product.entries).max())
    report = is_c_symmetric(A, conj, M, tol, W=W)
    verdict = UNITARY_WITH_CONJUGATION if report.verdict else ISOMETRY_NOT_CS
    if verdict == ISOMETRY_NOT_CS:
        logger.warning("Isometric operator failed its symmetry check", extra={"residual": report.residual})
    return IsometryCheck(verdict, conj, iso, coiso, report.residual, decomposition, gamma)


@dataclass(frozen=True, eq=False)
class UnimodularToeplitz:
    matrix: OpMatrix
    conjugation: ConjugationSpec
    symbol: CircleSymbol
    unitary_part: OpMatrix
    report: SymmetryReport
    skew_residual: float
    symbol_norm: float
    phase_residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def best_phase(self) -> Optional[complex]:
        if self.phase_residuals.size == 0:
            return None
        k = int(np.argmin(self.phase_residuals))
        return complex(np.exp(2j * np.pi * k / self.phase_residuals.size))

    @property
    def unitary_gap(self) -> float:
        """Largest entry of U*U - I on the leading block of the unitary part."""
        M = self.report.M
        U = self.unitary_part.entries
        return float(np.abs((U.conj().T @ U)[:M, :M] - np.eye(M)).max())


def unimodular_toeplitz_operator(
    p: complex,
    N: int,
    M: Optional[int] = None,
    c: complex = 1.0,
    tol: float = 1e-6,
    phase_steps: int = 0,
) -> UnimodularToeplitz:
    """Toeplitz operator of (p - z)/|1 - p z| with the conjugation built from phi_p."""
    p = complex(p)
    if abs(p.imag) > 0.0:
        raise SymmetryError(f"p must be real, got {p}")
    p = p.real
    if p == 0.0 or abs(p) >= 1.0:
        raise SymmetryError(f"p must lie in (-1, 1) without 0, got {p}")
    M = M if M is not None else N // 4

    symbol = CircleSymbol(lambda z: (p - z) / np.abs(1.0 - p * z), f"({p}-z)/|1-{p}z|")
    A = toeplitz_matrix_symbol(symbol, N)
    conj = ConjugationSpec.weighted(p, c)
    W = conj.realize(N)
    report = is_c_symmetric(A, conj, M, tol, W=W)
    skew = skew_residual(A, W, M)

    lift = CircleSymbol.modulus_of_linear(p) * (1.0 / math.sqrt(1.0 - p * p))
    unitary_part = composition_matrix(phi_p(p), N) @ toeplitz_matrix_symbol(lift, N)

    S = default_resolution(N)
    symbol_norm = float(np.sqrt(np.sum(np.abs(symbol_coefficients(symbol, S)) ** 2)))

    phases = np.zeros(0)
    if phase_steps > 0:
        base = ConjugationSpec.weighted(p, 1.0).realize(N)
        phases = np.array([
            symmetry_residual(A, OpMatrix(np.exp(2j * np.pi * k / phase_steps) * base.entries), M)
            for k in range(phase_steps)
        ])

    logger.info(
        "Unimodular Toeplitz operator",
        extra={"p": p, "N": N, "M": M, "residual": report.residual, "skew": skew},
    )
    return UnimodularToeplitz(A, conj, symbol, unitary_part, report, skew, symbol_norm, phases)
