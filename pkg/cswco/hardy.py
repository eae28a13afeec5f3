"""Truncated Hardy-space matrices in the monomial basis {1, z, z^2, ...}.

Column ``j`` of every operator matrix holds the first ``N`` Taylor
coefficients of the image of ``z**j``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg

from .moebius import LFMap, NotSelfMapError, cowen_triple, evaluate, identity, is_self_map_of_disk
from .series import Rational, power_series, truncated_product

logger = logging.getLogger(__name__)


class HardyError(ValueError):
    pass


class DimensionError(HardyError):
    pass


class ResolutionError(HardyError):
    pass


class PoleInDiskError(HardyError):
    pass


@dataclass(frozen=True, eq=False)
class CoeffVec:
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise DimensionError("a coefficient vector needs N >= 1 entries")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def N(self) -> int:
        return int(self.coeffs.size)


@dataclass(frozen=True, eq=False)
class OpMatrix:
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise DimensionError(f"expected a square matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise HardyError("matrix has non-finite entries")
        object.__setattr__(self, "entries", entries)

    @property
    def N(self) -> int:
        return int(self.entries.shape[0])

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        if other.N != self.N:
            raise DimensionError(f"cannot multiply {self.N}x{self.N} by {other.N}x{other.N}")
        return OpMatrix(self.entries @ other.entries)

    def block(self, M: int) -> np.ndarray:
        return self.entries[:M, :M]

    def to_json(self) -> list:
        return [[[value.real, value.imag] for value in row] for row in self.entries]


SymbolFunc = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class CircleSymbol:
    """A bounded function on the unit circle, sampled for Fourier coefficients."""

    func: SymbolFunc
    label: str
    resolution: Optional[int] = None

    @classmethod
    def constant(cls, value: complex) -> "CircleSymbol":
        return cls(lambda z: np.full_like(z, value, dtype=complex), f"{value}")

    @classmethod
    def modulus_of_linear(cls, p: complex, exponent: float = 1.0) -> "CircleSymbol":
        """|1 - p z| ** exponent"""
        return cls(lambda z: np.abs(1.0 - p * z) ** exponent, f"|1-({p})z|^{exponent}")

    @classmethod
    def rational(cls, weight: Rational) -> "CircleSymbol":
        return cls(lambda z: weight(z), "rational")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(z), dtype=complex)

    def __mul__(self, other: Union["CircleSymbol", Rational, complex, float]) -> "CircleSymbol":
        if isinstance(other, Rational):
            other = CircleSymbol.rational(other)
        if isinstance(other, CircleSymbol):
            first, second = self.func, other.func
            return CircleSymbol(lambda z: first(z) * second(z), f"({self.label})*({other.label})", self.resolution)
        scale = complex(other)
        func = self.func
        return CircleSymbol(lambda z: scale * func(z), f"{scale}*({self.label})", self.resolution)

    __rmul__ = __mul__

    def with_resolution(self, resolution: int) -> "CircleSymbol":
        return CircleSymbol(self.func, self.label, resolution)


def _check_order(N: int) -> None:
    if N < 1:
        raise DimensionError("truncation order must be at least 1")


def default_resolution(N: int) -> int:
    return 1 << int(np.ceil(np.log2(8 * N)))


def symbol_coefficients(symbol: CircleSymbol, S: int) -> np.ndarray:
    """DFT estimate of the Fourier coefficients; index ``S + n`` holds coefficient ``n < 0``."""
    nodes = np.exp(2j * np.pi * np.arange(S) / S)
    return np.fft.fft(symbol(nodes)) / S


def taylor_of_rational(num, den, N: int) -> CoeffVec:
    return CoeffVec(power_series(num, den, N))


def kernel_vector(w: complex, N: int) -> CoeffVec:
    _check_order(N)
    w = complex(w)
    if abs(w) >= 1.0:
        raise HardyError(f"kernel point must lie in the open disk, got {w}")
    return CoeffVec(np.conj(w) ** np.arange(N))


def weighted_composition_matrix(psi: Rational, phi: LFMap, N: int) -> OpMatrix:
    _check_order(N)
    if not is_self_map_of_disk(phi):
        raise NotSelfMapError(f"{phi!r} does not map the disk into itself")
    if not psi.is_analytic_on_closed_disk():
        raise PoleInDiskError(f"weight has poles {psi.poles()} in the closed disk")
    column = psi.taylor(N)
    phi_series = Rational.from_map(phi).taylor(N)
    entries = np.empty((N, N), dtype=complex)
    for j in range(N):
        entries[:, j] = column
        column = truncated_product(column, phi_series, N)
    return OpMatrix(entries)


def composition_matrix(phi: LFMap, N: int) -> OpMatrix:
    return weighted_composition_matrix(Rational.constant(1.0), phi, N)


def toeplitz_matrix_analytic(psi: Rational, N: int) -> OpMatrix:
    return weighted_composition_matrix(psi, identity(), N)


def toeplitz_matrix_symbol(symbol: CircleSymbol, N: int) -> OpMatrix:
    _check_order(N)
    S = symbol.resolution or default_resolution(N)
    if S < 8 * N:
        raise ResolutionError(f"resolution {S} is below 8N = {8 * N}")
    if S & (S - 1):
        raise ResolutionError(f"resolution {S} is not a power of two")
    coeffs = symbol_coefficients(symbol, S)
    column = coeffs[:N]
    row = np.concatenate((coeffs[:1], coeffs[:-N:-1]))
    return OpMatrix(scipy.linalg.toeplitz(column, row))


def adjoint(A: OpMatrix) -> OpMatrix:
    return OpMatrix(A.entries.conj().T)


def block_residual(A: OpMatrix, B: OpMatrix, M: int) -> float:
    if A.N != B.N:
        raise DimensionError(f"dimension mismatch: {A.N} vs {B.N}")
    if not 1 <= M <= A.N:
        raise DimensionError(f"block size {M} outside 1..{A.N}")
    return float(np.abs(A.block(M) - B.block(M)).max())


def cowen_adjoint_matrix(phi: LFMap, N: int) -> OpMatrix:
    """T_g C_sigma T_h^H at truncation N."""
    triple = cowen_triple(phi)
    t_g = toeplitz_matrix_analytic(triple.g, N)
    c_sigma = composition_matrix(triple.sigma, N)
    t_h = toeplitz_matrix_analytic(triple.h, N)
    return t_g @ c_sigma @ adjoint(t_h)


def kernel_covariance_residual(psi: Rational, phi: LFMap, w: complex, N: int, M: int) -> float:
    A = weighted_composition_matrix(psi, phi, N)
    lhs = adjoint(A).entries @ kernel_vector(w, N).coeffs
    rhs = np.conj(psi(w)) * kernel_vector(evaluate(phi, w), N).coeffs
    return float(np.abs(lhs[:M] - rhs[:M]).max())


def finite_section_residual(
    build_left: Callable[[int], OpMatrix],
    build_right: Callable[[int], OpMatrix],
    N: int,
    M: int,
) -> float:
    """Leading-block gap between the product of N-truncations and of 2N-truncations."""
    coarse = build_left(N) @ build_right(N)
    fine = build_left(2 * N) @ build_right(2 * N)
    residual = float(np.abs(coarse.block(M) - fine.block(M)).max())
    logger.debug("Finite section residual", extra={"N": N, "M": M, "residual": residual})
    return residual
