from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .series import Rational

logger = logging.getLogger(__name__)

INFINITY = complex(math.inf, 0.0)

IDENTITY = "identity"
ELLIPTIC = "elliptic"
PARABOLIC = "parabolic"
HYPERBOLIC_INTERIOR = "hyperbolic-DW-interior"
HYPERBOLIC_BOUNDARY = "hyperbolic-DW-boundary"
LOXODROMIC_OTHER = "loxodromic-other"

NORMAL_FORM_KINDS = ("hyperbolic-boundary", "hyperbolic-interior", "parabolic")

PHI_P_PARABOLIC = "parabolic-fixing-1"
PHI_P_HYPERBOLIC = "hyperbolic-DW-minus-1"
PHI_P_NEITHER = "neither"

_POLE_TOL = 1e-15
_DEGENERATE_TOL = 1e-14
_DEGREE_DROP_TOL = 1e-14
_DOUBLE_ROOT_TOL = 1e-10
_BOUNDARY_TOL = 1e-9
_UNIMODULAR_TOL = 1e-9
_SELF_MAP_SLACK = 1e-10
_PROJECTIVE_TOL = 1e-12


class MoebiusError(ValueError):
    pass


class PoleError(MoebiusError):
    pass


class DegenerateMapError(MoebiusError):
    pass


class NotSelfMapError(MoebiusError):
    pass


class ParameterDomainError(MoebiusError):
    pass


class IdentityMapError(MoebiusError):
    pass


class NotJFormError(MoebiusError):
    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class LFMap:
    """``z -> (a z + b) / (c z + d)``, scaled so the largest coefficient has modulus one.

    Equality is projective: two maps are equal when their quadruples are proportional.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        coeffs = [complex(value) for value in (self.a, self.b, self.c, self.d)]
        scale = max(abs(value) for value in coeffs)
        if scale == 0.0 or not math.isfinite(scale):
            raise DegenerateMapError(f"invalid coefficients {coeffs!r}")
        coeffs = [value / scale for value in coeffs]
        a, b, c, d = coeffs
        if abs(a * d - b * c) < _DEGENERATE_TOL:
            raise DegenerateMapError("ad - bc vanishes; the map is constant")
        for name, value in zip("abcd", coeffs):
            object.__setattr__(self, name, value)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "LFMap":
        return cls(matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1])

    @classmethod
    def from_json(cls, payload: dict) -> "LFMap":
        values = []
        for key in "abcd":
            re_im = payload[key]
            values.append(complex(float(re_im[0]), float(re_im[1])))
        return cls(*values)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def pole(self) -> complex:
        if abs(self.c) < _DEGREE_DROP_TOL:
            return INFINITY
        return -self.d / self.c

    def __call__(self, z: complex) -> complex:
        return evaluate(self, z)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LFMap):
            return NotImplemented
        return equivalent(self, other)

    def __repr__(self) -> str:
        return f"LFMap(a={self.a:.6g}, b={self.b:.6g}, c={self.c:.6g}, d={self.d:.6g})"

    def to_json(self) -> dict:
        return {key: [value.real, value.imag] for key, value in zip("abcd", (self.a, self.b, self.c, self.d))}


@dataclass(frozen=True)
class MapClass:
    tag: str
    is_automorphism: bool


@dataclass(frozen=True)
class MapAnalysis:
    fixed_points: tuple[complex, ...]
    double_root: bool
    multipliers: tuple[complex, ...]
    denjoy_wolff: Optional[complex]
    map_class: MapClass
    translation_number: Optional[complex] = None
    multiplier_r: Optional[float] = None
    boundary_fixed_point: Optional[complex] = None


@dataclass(frozen=True)
class NormalFormJ:
    """J-form data: phi(z) = a0 + a1 z / (1 - a0 z) and psi(z) = b / (1 - a0 z)."""

    a0: complex
    a1: complex
    b: complex

    def __post_init__(self) -> None:
        for name in ("a0", "a1", "b"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if abs(self.a0) >= 1.0:
            raise ParameterDomainError(f"a0 must lie in the open disk, got {self.a0}")

    @classmethod
    def parabolic(cls, t: complex, zeta: int = 1, psi0: complex = 1.0) -> "NormalFormJ":
        """Parabolic J-form pair fixing ``zeta`` (+1 or -1) with translation number ``t``."""
        if zeta not in (1, -1):
            raise ParameterDomainError("a parabolic J-form map fixes 1 or -1")
        t = complex(t)
        if t.real < -1e-15:
            raise ParameterDomainError("translation number must satisfy Re(t) >= 0")
        return cls(a0=zeta * t / (2 + t), a1=4 / (2 + t) ** 2, b=psi0)

    @property
    def is_constant(self) -> bool:
        return abs(self.a1) < _POLE_TOL

    @property
    def phi(self) -> LFMap:
        if self.is_constant:
            raise DegenerateMapError("a1 = 0 gives the constant map a0")
        return LFMap(self.a1 - self.a0 * self.a0, self.a0, -self.a0, 1.0)

    @property
    def psi(self) -> Rational:
        return Rational.j_weight(self.a0, self.b)


@dataclass(frozen=True, eq=False)
class CowenTriple:
    sigma: LFMap
    g: Rational
    h: Rational


@dataclass(frozen=True)
class PhiPClass:
    kind: str
    theta: float
    boundary_point: Optional[complex] = None
    closed_form_derivative: Optional[float] = None
    derivative_at_boundary: Optional[complex] = None


def identity() -> LFMap:
    return LFMap(1.0, 0.0, 0.0, 1.0)


def rotation(lam: complex) -> LFMap:
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ParameterDomainError(f"rotation factor must be unimodular, got {lam}")
    return LFMap(lam, 0.0, 0.0, 1.0)


def evaluate(m: LFMap, z: complex) -> complex:
    if cmath.isinf(z):
        if abs(m.c) < _DEGREE_DROP_TOL:
            return INFINITY
        return m.a / m.c
    den = m.c * z + m.d
    if abs(den) < _POLE_TOL:
        raise PoleError(f"{m!r} has a pole at {z}")
    return (m.a * z + m.b) / den


def compose(outer: LFMap, inner: LFMap) -> LFMap:
    """Return ``outer o inner``."""
    try:
        return LFMap.from_matrix(outer.matrix @ inner.matrix)
    except DegenerateMapError as exc:
        raise DegenerateMapError(f"degenerate product of {outer!r} and {inner!r}") from exc


def inverse(m: LFMap) -> LFMap:
    return LFMap(m.d, -m.b, -m.c, m.a)


def derivative(m: LFMap, z: complex) -> complex:
    den = m.c * z + m.d
    if abs(den) < _POLE_TOL:
        raise PoleError(f"{m!r} has a pole at {z}")
    return m.determinant / (den * den)


def equivalent(first: LFMap, second: LFMap, tol: float = _PROJECTIVE_TOL) -> bool:
    """Projective equality: every 2x2 minor of the stacked quadruples vanishes."""
    x = (first.a, first.b, first.c, first.d)
    y = (second.a, second.b, second.c, second.d)
    for i in range(4):
        for j in range(i + 1, 4):
            if abs(x[i] * y[j] - x[j] * y[i]) > tol:
                return False
    return True


def is_identity(m: LFMap) -> bool:
    return equivalent(m, identity())


def image_circle(m: LFMap) -> tuple[complex, float]:
    """Center and radius of the image of the unit circle.

    Raises ``PoleError`` when the pole sits on the circle (the image is a line).
    """
    images = [evaluate(m, z) for z in (1.0, 1j, -1.0)]
    x = [w.real for w in images]
    y = [w.imag for w in images]
    system = np.array(
        [[2 * (x[1] - x[0]), 2 * (y[1] - y[0])], [2 * (x[2] - x[0]), 2 * (y[2] - y[0])]]
    )
    rhs = np.array([abs(images[1]) ** 2 - abs(images[0]) ** 2, abs(images[2]) ** 2 - abs(images[0]) ** 2])
    try:
        cx, cy = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise PoleError("image of the unit circle is a line") from exc
    center = complex(cx, cy)
    return center, abs(images[0] - center)


def is_self_map_of_disk(m: LFMap, samples: int = 64) -> bool:
    if samples < 64:
        raise ValueError("samples must be at least 64")
    pole = m.pole
    if not cmath.isinf(pole) and abs(pole) <= 1.0:
        return False
    if abs(evaluate(m, 0.0)) >= 1.0:
        return False
    try:
        center, radius = image_circle(m)
    except PoleError:
        return False
    if abs(center) + radius > 1.0 + _SELF_MAP_SLACK:
        return False
    boundary = np.exp(2j * np.pi * np.arange(samples) / samples)
    values = (m.a * boundary + m.b) / (m.c * boundary + m.d)
    return bool(np.max(np.abs(values)) <= 1.0 + _SELF_MAP_SLACK)


def is_automorphism(m: LFMap) -> bool:
    if not is_self_map_of_disk(m):
        return False
    center, radius = image_circle(m)
    return abs(center) < _UNIMODULAR_TOL and abs(radius - 1.0) < _UNIMODULAR_TOL


def fixed_points(m: LFMap) -> tuple[list[complex], bool]:
    """Roots of c z^2 + (d - a) z - b = 0 on the Riemann sphere.

    Returns the roots sorted by modulus and a flag for the double root.
    """
    beta = m.d - m.a
    if abs(m.c) < _DEGREE_DROP_TOL:
        if abs(beta) < _DEGREE_DROP_TOL:
            return [INFINITY], True
        return [m.b / beta, INFINITY], False
    disc = beta * beta + 4 * m.b * m.c
    if abs(disc) < _DOUBLE_ROOT_TOL:
        return [-beta / (2 * m.c)], True
    root = cmath.sqrt(disc)
    if abs(beta + root) < abs(beta - root):
        root = -root
    q = -0.5 * (beta + root)
    points = sorted([q / m.c, -m.b / q], key=abs)
    return points, False


def multiplier(m: LFMap, z: complex) -> complex:
    if cmath.isinf(z):
        return m.d / m.a
    return derivative(m, z)


def _half_plane_model(m: LFMap, zeta: complex) -> tuple[complex, complex, float]:
    # T(z) = (zeta + z) / (zeta - z) sends zeta to infinity
    t_matrix = np.array([[1.0, zeta], [-1.0, zeta]], dtype=complex)
    t_inverse = np.array([[zeta, -zeta], [1.0, 1.0]], dtype=complex)
    hat = t_matrix @ m.matrix @ t_inverse
    scale = abs(hat).max()
    return hat[0, 0] / hat[1, 1], hat[0, 1] / hat[1, 1], abs(hat[1, 0]) / scale


def translation_number(m: LFMap, zeta: complex) -> complex:
    """Translation constant of ``m`` conjugated to the right half-plane at ``zeta``."""
    if is_identity(m):
        raise IdentityMapError("the identity has no translation number")
    _, t, defect = _half_plane_model(m, zeta)
    if defect > 1e-8:
        raise MoebiusError(f"{zeta} is not a fixed point of {m!r}")
    return t


def analyze(m: LFMap) -> MapAnalysis:
    if not is_self_map_of_disk(m):
        raise NotSelfMapError(f"{m!r} does not map the disk into itself")
    automorphism = is_automorphism(m)
    if is_identity(m):
        return MapAnalysis((), False, (), None, MapClass(IDENTITY, True))

    points, double = fixed_points(m)
    multipliers = tuple(multiplier(m, z) for z in points)

    if double:
        zeta = points[0] / abs(points[0])
        _, t, _ = _half_plane_model(m, zeta)
        analysis = MapAnalysis(
            tuple(points), True, multipliers, zeta, MapClass(PARABOLIC, automorphism),
            translation_number=t, boundary_fixed_point=zeta,
        )
        logger.debug("Parabolic map", extra={"zeta": zeta, "t": t})
        return analysis

    boundary = [
        (z, k) for z, k in zip(points, multipliers) if not cmath.isinf(z) and abs(abs(z) - 1.0) < _BOUNDARY_TOL
    ]
    if boundary:
        attracting = [(z, k) for z, k in boundary if abs(k) < 1.0]
        if attracting:
            zeta = attracting[0][0] / abs(attracting[0][0])
            r, t, _ = _half_plane_model(m, zeta)
            return MapAnalysis(
                tuple(points), False, multipliers, zeta, MapClass(HYPERBOLIC_BOUNDARY, automorphism),
                translation_number=t, multiplier_r=float(r.real), boundary_fixed_point=zeta,
            )
        zeta = boundary[0][0] / abs(boundary[0][0])
        interior = [z for z in points if abs(z) < 1.0]
        if not interior:
            raise MoebiusError(f"{m!r} has a repelling boundary fixed point and no interior one")
        # normal form parameters are those of the Cowen auxiliary map
        r, t, _ = _half_plane_model(cowen_triple(m).sigma, zeta)
        return MapAnalysis(
            tuple(points), False, multipliers, interior[0], MapClass(HYPERBOLIC_INTERIOR, automorphism),
            translation_number=t, multiplier_r=float(r.real), boundary_fixed_point=zeta,
        )

    interior = [(z, k) for z, k in zip(points, multipliers) if abs(z) < 1.0]
    if not interior:
        raise MoebiusError(f"{m!r} has no fixed point in the closed disk")
    w, k = interior[0]
    if abs(abs(k) - 1.0) < _UNIMODULAR_TOL:
        return MapAnalysis(tuple(points), False, multipliers, None, MapClass(ELLIPTIC, automorphism))
    return MapAnalysis(tuple(points), False, multipliers, w, MapClass(LOXODROMIC_OTHER, automorphism))


def build_normal_form(kind: str, zeta: complex, r: Optional[float] = None, t: complex = 0.0) -> LFMap:
    zeta = complex(zeta)
    t = complex(t)
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise ParameterDomainError(f"zeta must be unimodular, got {zeta}")
    if t.real < -1e-15:
        raise ParameterDomainError("translation number must satisfy Re(t) >= 0")
    zeta_bar = zeta.conjugate()

    if kind == "parabolic":
        if r is not None:
            raise ParameterDomainError("the parabolic normal form takes no multiplier")
        return LFMap(2 - t, t * zeta, -t * zeta_bar, 2 + t)

    if kind not in NORMAL_FORM_KINDS:
        raise ParameterDomainError(f"unknown normal form {kind!r}")
    if r is None or r <= 1.0:
        raise ParameterDomainError("hyperbolic normal forms need a multiplier r > 1")

    if kind == "hyperbolic-boundary":
        return LFMap(1 + r - t, (r + t - 1) * zeta, (r - t - 1) * zeta_bar, 1 + r + t)

    if t.real <= 0.0:
        raise ParameterDomainError("an interior Denjoy-Wolff point needs Re(t) > 0")
    tb = t.conjugate()
    return LFMap(1 + r - tb, -(r - tb - 1) * zeta, -(r + tb - 1) * zeta_bar, 1 + r + tb)


def phi_p(p: complex) -> LFMap:
    """The automorphism (conj(p)/p)(p - z)/(1 - conj(p) z)."""
    p = complex(p)
    if p == 0 or abs(p) >= 1.0:
        raise ParameterDomainError(f"p must lie in the punctured disk, got {p}")
    lam = p.conjugate() / p
    return LFMap(-lam, p.conjugate(), -p.conjugate(), 1.0)


def psi_p(p: complex, c: complex = 1.0) -> Rational:
    """The weight c (1 - |p|^2)^(1/2) / (1 - conj(p) z)."""
    p = complex(p)
    c = complex(c)
    if abs(p) >= 1.0:
        raise ParameterDomainError(f"p must lie in the disk, got {p}")
    if abs(abs(c) - 1.0) > 1e-12:
        raise ParameterDomainError(f"c must be unimodular, got {c}")
    return Rational([c * math.sqrt(1.0 - abs(p) ** 2)], [1.0, -p.conjugate()])


def classify_phi_p(p: complex) -> PhiPClass:
    p = complex(p)
    if p == 0:
        raise ParameterDomainError("p must be nonzero")
    theta = cmath.phase(p)
    m = phi_p(p)
    if abs(abs(p) - math.cos(theta)) < 1e-12:
        return PhiPClass(PHI_P_PARABOLIC, theta, 1.0 + 0j, 1.0, derivative(m, 1.0))
    if abs(abs(p) + math.cos(theta)) < 1e-12:
        return PhiPClass(PHI_P_HYPERBOLIC, theta, -1.0 + 0j, abs(math.sin(theta)), derivative(m, -1.0))
    return PhiPClass(PHI_P_NEITHER, theta)


def j_form_residual(m: LFMap) -> float:
    """|c/d + b/d|, zero exactly when m(z) = a0 + a1 z / (1 - a0 z)."""
    if abs(m.d) < _POLE_TOL:
        return math.inf
    return abs(m.c / m.d + m.b / m.d)


def is_j_form_map(m: LFMap, tol: float = 1e-10) -> bool:
    return j_form_residual(m) <= tol


def to_j_normal_form(psi: Rational, phi: LFMap, tol: float = 1e-10) -> NormalFormJ:
    map_residual = j_form_residual(phi)
    if not math.isfinite(map_residual):
        raise NotJFormError("phi(0) is not finite", map_residual)
    a0 = phi.b / phi.d
    if abs(a0) >= 1.0:
        raise NotJFormError(f"phi(0) = {a0} lies outside the disk", math.inf)
    if map_residual > tol:
        raise NotJFormError(f"phi is not of the form a0 + a1 z/(1 - a0 z), residual {map_residual:.3e}", map_residual)
    b = psi(0.0)
    weight_residual = psi.cross_residual(Rational.j_weight(a0, b))
    if weight_residual > tol:
        raise NotJFormError(f"psi is not b/(1 - a0 z), residual {weight_residual:.3e}", weight_residual)
    return NormalFormJ(a0=a0, a1=phi.a / phi.d + a0 * a0, b=b)


def cowen_triple(m: LFMap) -> CowenTriple:
    a, b, c, d = (m.a.conjugate(), m.b.conjugate(), m.c.conjugate(), m.d.conjugate())
    sigma = LFMap(a, -c, -b, d)
    g = Rational([1.0], [d, -b])
    h = Rational([m.d, m.c], [1.0])
    return CowenTriple(sigma=sigma, g=g, h=h)
