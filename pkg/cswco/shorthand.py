"""Text grammar for maps, weights and conjugations used on the command line.

Maps:          identity | phi_p:P | rot:L | nf:A0,A1 | lf:A,B,C,D
               hyp:zeta=Z,r=R,t=T | hypint:zeta=Z,r=R,t=T | par:zeta=Z,t=T
               {"a": [re, im], "b": ..., "c": ..., "d": ...}
Weights:       const:V | psi_p:P[,C] | jw:A0,B | rat:N0,N1,.../D0,D1,...
               {"num": [[re, im], ...], "den": [[re, im], ...]}
Conjugations:  J | wj:P_RE,P_IM[,C_RE,C_IM] | rot:L_RE,L_IM

Complex values are written ``0.5``, ``-0.5+0.5i`` or ``0.4j``.  Where a prefix
takes a single complex value, the pair form ``re,im`` is accepted too.
"""
from __future__ import annotations

import json
from typing import Callable, TypeVar

from .moebius import LFMap, MoebiusError, NormalFormJ, build_normal_form, identity, phi_p, psi_p, rotation
from .series import Rational, SeriesError
from .symmetry import ConjugationSpec, SymmetryError

T = TypeVar("T")


class ShorthandError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    token = text.strip().replace(" ", "")
    if not token:
        raise ShorthandError("empty complex value")
    if "j" not in token:
        token = token.replace("i", "j")
    try:
        return complex(token)
    except ValueError as exc:
        raise ShorthandError(f"cannot parse complex value {text!r}") from exc


def _values(body: str) -> list[complex]:
    return [parse_complex(token) for token in body.split(",") if token.strip()]


def parse_scalar(body: str, prefix: str = "value") -> complex:
    values = _values(body)
    if len(values) == 1:
        return values[0]
    if len(values) == 2 and values[0].imag == 0 and values[1].imag == 0:
        return complex(values[0].real, values[1].real)
    raise ShorthandError(f"{prefix}: expects one complex value or a re,im pair")


def _keywords(body: str, prefix: str) -> dict[str, complex]:
    result: dict[str, complex] = {}
    for item in body.split(","):
        if not item.strip():
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ShorthandError(f"{prefix}: expected key=value, got {item!r}")
        result[key.strip()] = parse_complex(value)
    return result


def _guard(build: Callable[[], T]) -> T:
    try:
        return build()
    except (MoebiusError, SeriesError, SymmetryError) as exc:
        raise ShorthandError(str(exc)) from exc


def _normal_form_map(kind: str, body: str, prefix: str) -> LFMap:
    params = _keywords(body, prefix)
    unknown = set(params) - {"zeta", "r", "t"}
    if unknown:
        raise ShorthandError(f"{prefix}: unknown parameters {sorted(unknown)}")
    r = params.get("r")
    return build_normal_form(
        kind,
        params.get("zeta", 1.0),
        None if r is None else r.real,
        params.get("t", 0.0),
    )


def parse_map(text: str) -> LFMap:
    text = text.strip()
    if text.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ShorthandError(f"invalid map JSON: {exc}") from exc
        try:
            m = LFMap.from_json(payload)
        except MoebiusError as exc:
            raise ShorthandError(str(exc)) from exc
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ShorthandError(f"map JSON needs a, b, c, d as [re, im] pairs: {exc}") from exc
        return m
    if text == "identity":
        return identity()

    prefix, sep, body = text.partition(":")
    if not sep:
        raise ShorthandError(f"unrecognised map {text!r}")
    if prefix == "phi_p":
        return _guard(lambda: phi_p(parse_scalar(body, prefix)))
    if prefix == "rot":
        return _guard(lambda: rotation(parse_scalar(body, prefix)))
    if prefix == "nf":
        values = _values(body)
        if len(values) != 2:
            raise ShorthandError("nf: expects a0,a1")
        return _guard(lambda: NormalFormJ(values[0], values[1], 1.0).phi)
    if prefix == "lf":
        values = _values(body)
        if len(values) != 4:
            raise ShorthandError("lf: expects a,b,c,d")
        return _guard(lambda: LFMap(*values))
    kinds = {"hyp": "hyperbolic-boundary", "hypint": "hyperbolic-interior", "par": "parabolic"}
    if prefix in kinds:
        return _guard(lambda: _normal_form_map(kinds[prefix], body, prefix))
    raise ShorthandError(f"unknown map prefix {prefix!r}")


def parse_weight(text: str) -> Rational:
    text = text.strip()
    if text.startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ShorthandError(f"invalid weight JSON: {exc}") from exc
        try:
            return Rational.from_json(payload)
        except (KeyError, TypeError, ValueError) as exc:
            raise ShorthandError(f"weight JSON needs num/den lists of [re, im] pairs: {exc}") from exc

    prefix, sep, body = text.partition(":")
    if not sep:
        return Rational.constant(parse_complex(text))
    if prefix == "const":
        return Rational.constant(parse_scalar(body, prefix))
    if prefix == "psi_p":
        values = _values(body)
        if len(values) not in (1, 2):
            raise ShorthandError("psi_p: expects p[,c]")
        return _guard(lambda: psi_p(*values))
    if prefix == "jw":
        values = _values(body)
        if len(values) != 2:
            raise ShorthandError("jw: expects a0,b")
        return Rational.j_weight(values[0], values[1])
    if prefix == "rat":
        num, slash, den = body.partition("/")
        if not slash:
            raise ShorthandError("rat: expects numerator/denominator coefficient lists")
        return _guard(lambda: Rational(_values(num), _values(den)))
    raise ShorthandError(f"unknown weight prefix {prefix!r}")


def parse_conjugation(text: str) -> ConjugationSpec:
    text = text.strip()
    if text == "J":
        return ConjugationSpec.j()
    prefix, sep, body = text.partition(":")
    if not sep:
        raise ShorthandError(f"unrecognised conjugation {text!r}")
    values = _values(body)
    if prefix == "wj":
        if len(values) == 1:
            return _guard(lambda: ConjugationSpec.weighted(values[0]))
        if len(values) == 2:
            return _guard(lambda: ConjugationSpec.weighted(complex(values[0].real, values[1].real)))
        if len(values) == 4:
            p = complex(values[0].real, values[1].real)
            c = complex(values[2].real, values[3].real)
            return _guard(lambda: ConjugationSpec.weighted(p, c))
        raise ShorthandError("wj: expects p_re,p_im[,c_re,c_im]")
    if prefix == "rot":
        return _guard(lambda: ConjugationSpec.rotated(parse_scalar(body, prefix)))
    raise ShorthandError(f"unknown conjugation prefix {prefix!r}")
