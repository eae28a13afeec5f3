from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Callable, Optional

from .config import ConfigError, RunConfig, load_settings
from .hardy import HardyError, OpMatrix, weighted_composition_matrix
from .moebius import (
    MoebiusError,
    NormalFormJ,
    NotSelfMapError,
    analyze,
    classify_phi_p,
)
from .reporting import (
    factorization_to_json,
    isometry_to_json,
    map_analysis_to_json,
    phi_p_class_to_json,
    unitary_class_to_json,
    weighted_pair_to_json,
    with_timestamp,
    write_csv,
    write_json,
    write_matrix,
)
from .series import SeriesError
from .shorthand import ShorthandError, parse_complex, parse_conjugation, parse_map, parse_scalar, parse_weight
from .spectra import (
    POINT_SET,
    HypothesisViolation,
    compare_spectrum,
    eigenvalues,
    predict_compact,
    predict_disk,
    predict_j_form_radius,
    predict_parabolic_spiral,
    predict_rotation,
)
from .suite import run_suite, summarize
from .symmetry import (
    ConjugationSpec,
    SymmetryError,
    check_isometry,
    classify_unitary_j_symmetric,
    construct_symmetric,
    factor_symmetric,
    is_c_symmetric,
    unimodular_toeplitz_operator,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NOT_SELF_MAP = 3
EXIT_HYPOTHESIS = 4

SPECTRUM_CASES = ("compact", "parabolic", "disk", "j-form", "rotation")


def configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--env", help="Path to .env file", default=None)
    common.add_argument("--config", help="Path to a JSON config file", default=None)
    common.add_argument("--verbose", action="store_true", help="Enable debug logging")
    common.add_argument("--output", help="Optional path to write the JSON report", default=None)
    common.add_argument("--no-timestamp", action="store_true", help="Omit generatedAt from the report")
    common.add_argument("--N", type=int, default=None, help="Truncation order")
    common.add_argument("--M", type=int, default=None, help="Leading block size used by residual checks")
    common.add_argument("--tol", type=float, default=None, help="Absolute tolerance for residual checks")
    common.add_argument("--rel-tol", type=float, default=None, help="Relative tolerance for eigenvalue matching")
    common.add_argument("--seed", type=int, default=None, help="Seed for randomized checks")
    common.add_argument("--workers", type=int, default=None, help="Worker threads for the suite")
    return common


def parse_args(argv: Optional[list[str]] = None) -> argparse.Namespace:
    common = _common_options()
    parser = argparse.ArgumentParser(description="Complex symmetric weighted composition operators on H^2")
    commands = parser.add_subparsers(dest="command", required=True)

    classify = commands.add_parser("classify", parents=[common], help="Classify a linear-fractional self-map")
    classify.add_argument("--map", required=True, help="Map shorthand or JSON")

    cs_check = commands.add_parser("cs-check", parents=[common], help="Test complex symmetry of C_psi,phi")
    cs_check.add_argument("--map", required=True)
    cs_check.add_argument("--psi", default="1", help="Weight shorthand or JSON")
    cs_check.add_argument("--conj", default="J", help="J | wj:p_re,p_im[,c_re,c_im] | rot:l_re,l_im")
    cs_check.add_argument("--matrix-out", default=None, help="Write the finite section as re,im CSV (or JSON by suffix)")

    spectrum = commands.add_parser("spectrum", parents=[common], help="Predicted spectrum against a finite section")
    spectrum.add_argument("--case", required=True, choices=SPECTRUM_CASES)
    spectrum.add_argument("--p", default=None)
    spectrum.add_argument("--a0", default="0")
    spectrum.add_argument("--a1", default="0")
    spectrum.add_argument("--b", default="1")
    spectrum.add_argument("--t", default="1")
    spectrum.add_argument("--psi0", default="1")
    spectrum.add_argument("--lam", default="1")
    spectrum.add_argument("--csv", default=None, help="Write the eigenvalue cloud as re,im CSV")
    spectrum.add_argument("--matrix-out", default=None, help="Write the finite section as re,im CSV (or JSON by suffix)")

    toeplitz = commands.add_parser("unimodular-toeplitz", parents=[common], help="Toeplitz operator of (p-z)/|1-pz|")
    toeplitz.add_argument("--p", required=True)
    toeplitz.add_argument("--c", default="1")
    toeplitz.add_argument("--phase-steps", type=int, default=0)

    commands.add_parser("suite", parents=[common], help="Run every acceptance criterion")

    construct = commands.add_parser("construct", parents=[common], help="Build a symmetric pair from a J-form")
    construct.add_argument("--conj", required=True)
    construct.add_argument("--nf", required=True, help="a0,a1[,b]")

    factor = commands.add_parser("factor", parents=[common], help="Split off the unitary factor of a conjugation")
    factor.add_argument("--map", required=True)
    factor.add_argument("--psi", default="1")
    factor.add_argument("--conj", required=True)

    unitary = commands.add_parser("unitary", parents=[common], help="Unitary and isometry classification")
    unitary.add_argument("--map", required=True)
    unitary.add_argument("--psi", default="1")
    return parser.parse_args(argv)


def _settings(args: argparse.Namespace) -> RunConfig:
    base = load_settings(
        Path(args.env) if args.env else None,
        Path(args.config) if args.config else None,
    )
    return base.with_overrides(
        N=args.N,
        M=args.M,
        tol=args.tol,
        rel_tol=args.rel_tol,
        seed=args.seed,
        workers=args.workers,
        output=Path(args.output) if args.output else None,
        timestamp=False if args.no_timestamp else None,
    )


def _emit(payload: dict, cfg: RunConfig) -> None:
    print(write_json(with_timestamp(payload, cfg.timestamp), cfg.output))


def _parse_normal_form(text: str) -> NormalFormJ:
    values = [parse_complex(token) for token in text.split(",") if token.strip()]
    if len(values) not in (2, 3):
        raise ShorthandError("--nf expects a0,a1[,b]")
    a0, a1, b = values if len(values) == 3 else (*values, 1.0)
    return NormalFormJ(a0, a1, b)


def cmd_classify(args: argparse.Namespace, cfg: RunConfig) -> int:
    m = parse_map(args.map)
    payload = map_analysis_to_json(m, analyze(m))
    if args.map.strip().startswith("phi_p:"):
        p = parse_scalar(args.map.split(":", 1)[1], "phi_p")
        payload["phiP"] = phi_p_class_to_json(p, classify_phi_p(p))
    _emit(payload, cfg)
    return EXIT_PASS


def _export_matrix(A: OpMatrix, path: Optional[str]) -> None:
    if path:
        entries = write_matrix(A, Path(path))
        logging.getLogger("cswco.export").info("Finite section written", extra={"path": path, "entries": entries})


def cmd_cs_check(args: argparse.Namespace, cfg: RunConfig) -> int:
    psi, phi, conj = parse_weight(args.psi), parse_map(args.map), parse_conjugation(args.conj)
    A = weighted_composition_matrix(psi, phi, cfg.N)
    _export_matrix(A, args.matrix_out)
    report = is_c_symmetric(A, conj, cfg.M, cfg.tol)
    _emit(report.to_json(), cfg)
    return EXIT_PASS if report.verdict else EXIT_FAIL


def _spectrum_operator(args: argparse.Namespace, cfg: RunConfig):
    case = args.case
    if case in ("compact", "parabolic", "disk") and args.p is None:
        raise ShorthandError(f"--case {case} needs --p")
    p = parse_complex(args.p) if args.p is not None else None
    if case == "compact":
        nf = NormalFormJ(parse_complex(args.a0), parse_complex(args.a1), parse_complex(args.b))
        prediction = predict_compact(nf, p, cfg.m_max)
        pair = None if nf.is_constant else construct_symmetric(ConjugationSpec.weighted(p), nf)
    elif case == "parabolic":
        nf = NormalFormJ.parabolic(parse_complex(args.t), 1, parse_complex(args.psi0))
        prediction = predict_parabolic_spiral(nf, p)
        pair = construct_symmetric(ConjugationSpec.weighted(p), nf)
    elif case == "disk":
        nf = NormalFormJ.parabolic(parse_complex(args.t), -1, parse_complex(args.psi0))
        prediction = predict_disk(nf, p)
        pair = construct_symmetric(ConjugationSpec.weighted(p), nf)
    elif case == "j-form":
        nf = NormalFormJ(parse_complex(args.a0), parse_complex(args.a1), parse_complex(args.b))
        prediction = predict_j_form_radius(nf, cfg.m_max)
        pair = None if nf.is_constant else (nf.psi, nf.phi)
    else:
        lam = parse_complex(args.lam)
        nf = NormalFormJ(parse_complex(args.a0), parse_complex(args.a1), parse_complex(args.b))
        prediction = predict_rotation(lam, nf, cfg.m_max)
        pair = construct_symmetric(ConjugationSpec.rotated(lam), nf)
    return prediction, pair


def cmd_spectrum(args: argparse.Namespace, cfg: RunConfig) -> int:
    logger = logging.getLogger("cswco.spectrum")
    prediction, pair = _spectrum_operator(args, cfg)
    payload: dict = {"case": args.case, "prediction": prediction.to_json(), "config": cfg.to_json()}
    status = EXIT_PASS

    if pair is not None:
        A: OpMatrix = weighted_composition_matrix(pair[0], pair[1], cfg.N)
        _export_matrix(A, args.matrix_out)
        eig = eigenvalues(A)
        payload["eigen"] = {
            "converged": eig.converged,
            "leading": [[z.real, z.imag] for z in eig.leading(cfg.eigen_k)],
        }
        if args.csv:
            rows = write_csv(eig.eigenvalues, Path(args.csv))
            logger.info("Eigenvalue cloud written", extra={"path": args.csv, "rows": rows})
        if prediction.kind == POINT_SET:
            comparison = compare_spectrum(eig, prediction, cfg.eigen_k, cfg.rel_tol)
            payload["comparison"] = comparison.to_json()
            status = EXIT_PASS if comparison.passed else EXIT_FAIL
        else:
            payload["note"] = "finite-section eigenvalues are reported without a pass/fail verdict"
    _emit(payload, cfg)
    return status


def cmd_unimodular_toeplitz(args: argparse.Namespace, cfg: RunConfig) -> int:
    result = unimodular_toeplitz_operator(
        parse_complex(args.p),
        cfg.N,
        M=cfg.M,
        c=parse_complex(args.c),
        tol=cfg.tol,
        phase_steps=args.phase_steps,
    )
    payload = {
        "symmetry": result.report.to_json(),
        "skewResidual": result.skew_residual,
        "symbolNorm": result.symbol_norm,
        "unitaryPartGap": result.unitary_gap,
        "unitaryPartBlockUnitary": result.unitary_gap < cfg.tol,
    }
    if result.phase_residuals.size:
        best = result.best_phase
        payload["phaseScan"] = {
            "steps": int(result.phase_residuals.size),
            "bestResidual": float(result.phase_residuals.min()),
            "bestPhase": [best.real, best.imag],
        }
    _emit(payload, cfg)
    passed = (
        result.skew_residual < cfg.tol
        and abs(result.symbol_norm - 1.0) < 1e-10
        and result.unitary_gap < cfg.tol
    )
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_suite(args: argparse.Namespace, cfg: RunConfig) -> int:
    logger = logging.getLogger("cswco.suite")
    summary = summarize(run_suite(cfg, logger=logger))
    summary["config"] = cfg.to_json()
    _emit(summary, cfg)
    if not summary["passed"]:
        logger.error("Suite failed at criterion %s", summary["firstFailure"])
        return EXIT_FAIL
    return EXIT_PASS


def cmd_construct(args: argparse.Namespace, cfg: RunConfig) -> int:
    conj = parse_conjugation(args.conj)
    psi_t, phi_t = construct_symmetric(conj, _parse_normal_form(args.nf))
    report = is_c_symmetric(weighted_composition_matrix(psi_t, phi_t, cfg.N), conj, cfg.M, cfg.tol)
    payload = weighted_pair_to_json(psi_t, phi_t)
    payload["symmetry"] = report.to_json()
    _emit(payload, cfg)
    return EXIT_PASS if report.verdict else EXIT_FAIL


def cmd_factor(args: argparse.Namespace, cfg: RunConfig) -> int:
    result = factor_symmetric(parse_weight(args.psi), parse_map(args.map), parse_conjugation(args.conj), N=cfg.N)
    _emit(factorization_to_json(result), cfg)
    return EXIT_PASS if result.factorable else EXIT_FAIL


def cmd_unitary(args: argparse.Namespace, cfg: RunConfig) -> int:
    psi, phi = parse_weight(args.psi), parse_map(args.map)
    isometry = check_isometry(psi, phi, cfg.wide_N, cfg.M, cfg.tol)
    payload = {
        "unitaryJ": unitary_class_to_json(classify_unitary_j_symmetric(psi, phi)),
        "isometry": isometry_to_json(isometry),
    }
    _emit(payload, cfg)
    return EXIT_PASS


COMMANDS: dict[str, Callable[[argparse.Namespace, RunConfig], int]] = {
    "classify": cmd_classify,
    "cs-check": cmd_cs_check,
    "spectrum": cmd_spectrum,
    "unimodular-toeplitz": cmd_unimodular_toeplitz,
    "suite": cmd_suite,
    "construct": cmd_construct,
    "factor": cmd_factor,
    "unitary": cmd_unitary,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = parse_args(argv)
    configure_logging(args.verbose)
    logger = logging.getLogger("cswco")

    try:
        cfg = _settings(args)
    except ConfigError as exc:
        logger.error("Configuration error: %s", exc)
        return EXIT_USAGE

    try:
        return COMMANDS[args.command](args, cfg)
    except NotSelfMapError as exc:
        logger.error("Not a self-map of the disk: %s", exc)
        return EXIT_NOT_SELF_MAP
    except HypothesisViolation as exc:
        logger.error("Hypothesis violated: %s", exc.condition)
        return EXIT_HYPOTHESIS
    except (ShorthandError, SymmetryError, MoebiusError, SeriesError, HardyError, ConfigError) as exc:
        logger.error("Invalid input: %s", exc)
        return EXIT_USAGE
    except Exception:  # noqa: BLE001
        logger.exception("Command %s failed", args.command)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
