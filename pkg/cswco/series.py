from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import signal

_ZERO_TOL = 1e-15
_CLOSED_DISK_SLACK = 1e-12

Scalar = Union[int, float, complex]


class SeriesError(ValueError):
    pass


def power_series(num, den, N: int) -> np.ndarray:
    """First ``N`` Taylor coefficients of num/den (ascending coefficient arrays)."""
    if N < 1:
        raise SeriesError("truncation order must be at least 1")
    num = np.atleast_1d(np.asarray(num, dtype=complex))
    den = np.atleast_1d(np.asarray(den, dtype=complex))
    if den[0] == 0:
        raise SeriesError("denominator has a zero constant term")
    impulse = np.zeros(N, dtype=complex)
    impulse[0] = 1.0
    return signal.lfilter(num, den, impulse)


def truncated_product(left: np.ndarray, right: np.ndarray, N: int) -> np.ndarray:
    return np.convolve(left, right)[:N]


def _trim(coeffs: np.ndarray) -> np.ndarray:
    scale = np.abs(coeffs).max(initial=0.0)
    if scale == 0.0:
        return coeffs[:1]
    keep = np.nonzero(np.abs(coeffs) > _ZERO_TOL * scale)[0]
    return coeffs[: keep[-1] + 1]


@dataclass(frozen=True, eq=False)
class Rational:
    num: np.ndarray
    den: np.ndarray

    def __post_init__(self) -> None:
        num = np.atleast_1d(np.asarray(self.num, dtype=complex))
        den = np.atleast_1d(np.asarray(self.den, dtype=complex))
        if not np.any(den):
            raise SeriesError("denominator is identically zero")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def constant(cls, value: Scalar) -> "Rational":
        return cls([value], [1.0])

    @classmethod
    def polynomial(cls, coeffs) -> "Rational":
        return cls(coeffs, [1.0])

    @classmethod
    def j_weight(cls, a0: Scalar, b: Scalar) -> "Rational":
        """b / (1 - a0 z)"""
        return cls([b], [1.0, -complex(a0)])

    @classmethod
    def from_map(cls, m) -> "Rational":
        return cls([m.b, m.a], [m.d, m.c])

    @classmethod
    def from_json(cls, payload: dict) -> "Rational":
        num = [complex(float(re), float(im)) for re, im in payload["num"]]
        den = [complex(float(re), float(im)) for re, im in payload["den"]]
        return cls(num, den)

    def __call__(self, z):
        den = P.polyval(z, self.den)
        if np.isscalar(den) and abs(den) < _ZERO_TOL:
            raise SeriesError(f"pole at {z}")
        return P.polyval(z, self.num) / den

    def __mul__(self, other: Union["Rational", Scalar]) -> "Rational":
        if isinstance(other, Rational):
            return Rational(P.polymul(self.num, other.num), P.polymul(self.den, other.den))
        return Rational(self.num * complex(other), self.den)

    __rmul__ = __mul__

    def __truediv__(self, other: Union["Rational", Scalar]) -> "Rational":
        if isinstance(other, Rational):
            if not np.any(other.num):
                raise SeriesError("division by the zero function")
            return Rational(P.polymul(self.num, other.den), P.polymul(self.den, other.num))
        return Rational(self.num / complex(other), self.den)

    def compose(self, m) -> "Rational":
        """Return ``self o m`` for a linear-fractional ``m``."""
        degree = max(len(self.num), len(self.den)) - 1
        top = np.array([m.b, m.a], dtype=complex)
        bottom = np.array([m.d, m.c], dtype=complex)

        def substitute(coeffs: np.ndarray) -> np.ndarray:
            out = np.zeros(1, dtype=complex)
            for k, coeff in enumerate(coeffs):
                if coeff == 0:
                    continue
                term = P.polymul(P.polypow(top, k), P.polypow(bottom, degree - k))
                out = P.polyadd(out, coeff * term)
            return out

        return Rational(substitute(self.num), substitute(self.den))

    def scaled_argument(self, lam: Scalar) -> "Rational":
        """Return z -> self(lam z)."""
        lam = complex(lam)
        return Rational(
            self.num * lam ** np.arange(len(self.num)),
            self.den * lam ** np.arange(len(self.den)),
        )

    def poles(self) -> np.ndarray:
        """Non-removable poles."""
        den = _trim(self.den)
        if len(den) < 2:
            return np.zeros(0, dtype=complex)
        roots = P.polyroots(den)
        num_scale = np.abs(self.num).max(initial=0.0)
        keep = []
        for root in roots:
            size = max(1.0, abs(root)) ** (len(self.num) - 1)
            if abs(P.polyval(root, self.num)) > 1e-9 * max(num_scale, 1e-300) * size:
                keep.append(root)
        return np.array(keep, dtype=complex)

    def is_analytic_on_closed_disk(self) -> bool:
        return bool(np.all(np.abs(self.poles()) > 1.0 + _CLOSED_DISK_SLACK))

    def taylor(self, N: int) -> np.ndarray:
        return power_series(self.num, self.den, N)

    def cross_residual(self, other: "Rational") -> float:
        """Relative size of num*other.den - other.num*den; zero iff the functions agree."""
        left = P.polymul(self.num, other.den)
        right = P.polymul(other.num, self.den)
        scale = max(np.abs(left).max(initial=0.0), np.abs(right).max(initial=0.0), 1e-300)
        return float(np.abs(P.polysub(left, right)).max(initial=0.0) / scale)

    def is_constant(self, tol: float = 1e-12) -> bool:
        return self.cross_residual(Rational.constant(self(0.0))) <= tol

    def to_json(self) -> dict:
        return {
            "num": [[value.real, value.imag] for value in _trim(self.num)],
            "den": [[value.real, value.imag] for value in _trim(self.den)],
        }
