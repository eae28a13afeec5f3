from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional

import numpy as np

from .hardy import OpMatrix
from .moebius import LFMap, MapAnalysis, NormalFormJ, PhiPClass
from .series import Rational
from .symmetry import Factorization, IsometryCheck, UnitaryJClass


def complex_pair(value: Optional[complex]) -> Optional[list[float]]:
    if value is None:
        return None
    value = complex(value)
    return [value.real, value.imag]


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


def map_analysis_to_json(m: LFMap, analysis: MapAnalysis) -> dict:
    return {
        "map": m.to_json(),
        "class": analysis.map_class.tag,
        "isAutomorphism": analysis.map_class.is_automorphism,
        "fixedPoints": [
            None if math.isinf(abs(z)) else complex_pair(z) for z in analysis.fixed_points
        ],
        "doubleRoot": analysis.double_root,
        "multipliers": [complex_pair(k) for k in analysis.multipliers],
        "denjoyWolff": complex_pair(analysis.denjoy_wolff),
        "translationNumber": complex_pair(analysis.translation_number),
        "multiplierR": analysis.multiplier_r,
        "boundaryFixedPoint": complex_pair(analysis.boundary_fixed_point),
    }


def phi_p_class_to_json(p: complex, result: PhiPClass) -> dict:
    return {
        "p": complex_pair(p),
        "kind": result.kind,
        "theta": result.theta,
        "boundaryPoint": complex_pair(result.boundary_point),
        "closedFormDerivative": result.closed_form_derivative,
        "derivativeAtBoundary": complex_pair(result.derivative_at_boundary),
    }


def normal_form_to_json(nf: Optional[NormalFormJ]) -> Optional[dict]:
    if nf is None:
        return None
    return {"a0": complex_pair(nf.a0), "a1": complex_pair(nf.a1), "b": complex_pair(nf.b)}


def weighted_pair_to_json(psi: Rational, phi: LFMap) -> dict:
    return {"psi": psi.to_json(), "phi": phi.to_json()}


def factorization_to_json(result: Factorization) -> dict:
    payload = weighted_pair_to_json(result.psi, result.phi)
    payload.update(
        {
            "factorable": result.factorable,
            "residual": _finite_or_none(result.residual),
            "normalForm": normal_form_to_json(result.normal_form),
        }
    )
    return payload


def unitary_class_to_json(result: UnitaryJClass) -> dict:
    return {
        "kind": result.kind,
        "p": complex_pair(result.p),
        "c": complex_pair(result.c),
        "mu": complex_pair(result.mu),
        "lambda": complex_pair(result.lam),
    }


def isometry_to_json(result: IsometryCheck) -> dict:
    return {
        "verdict": result.verdict,
        "conjugation": result.conjugation.to_json() if result.conjugation else None,
        "isometryResidual": result.isometry_residual,
        "coisometryResidual": result.coisometry_residual,
        "symmetryResidual": result.symmetry_residual,
        "decompositionResidual": result.decomposition_residual,
        "gamma": complex_pair(result.gamma),
    }


def with_timestamp(payload: dict, enabled: bool) -> dict:
    if enabled:
        payload = {**payload, "generatedAt": datetime.now(timezone.utc).isoformat()}
    return payload


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True)


def write_json(payload: Any, path: Optional[Path]) -> str:
    text = dumps(payload)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text


def write_csv(points: Iterable[complex], path: Path) -> int:
    """Write an eigenvalue cloud as ``re,im`` rows and return the row count."""
    values = np.asarray(list(points), dtype=complex)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["re", "im"])
        for value in values:
            writer.writerow([format(value.real, ".17g"), format(value.imag, ".17g")])
    return int(values.size)


def write_matrix(matrix: OpMatrix, path: Path) -> int:
    """Write a finite section row-major as ``re,im`` CSV, or as nested pairs when the path ends in .json."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.parent.mkdir(parents=True, exist_ok=True)
        write_json(matrix.to_json(), path)
        return matrix.N * matrix.N
    return write_csv(matrix.entries.ravel(order="C"), path)
