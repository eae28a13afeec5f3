import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cswco.hardy import DimensionError, OpMatrix, weighted_composition_matrix
from cswco.moebius import LFMap, NormalFormJ, equivalent, identity, phi_p, psi_p, rotation
from cswco.series import Rational
from cswco.symmetry import (
    ISOMETRY_NOT_CS,
    NOT_ISOMETRY,
    NOT_UNITARY_J_SYMMETRIC,
    UNITARY_J_SYMMETRIC,
    UNITARY_J_SYMMETRIC_ROTATION,
    UNITARY_WITH_CONJUGATION,
    VARIANT_J,
    VARIANT_WEIGHTED,
    ConjugationSpec,
    SymmetryError,
    check_isometry,
    classify_unitary_j_symmetric,
    conjugation_axioms,
    construct_symmetric,
    factor_symmetric,
    is_c_symmetric,
    split_symmetric,
    symmetry_residual,
    transfer_residuals,
    unimodular_toeplitz_operator,
)

COMPACT = NormalFormJ(0.2, 0.3, 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"variant": "K"},
        {"variant": VARIANT_WEIGHTED, "p": 0.0},
        {"variant": VARIANT_WEIGHTED, "p": 1.0},
        {"variant": VARIANT_WEIGHTED, "p": 0.5, "c": 2.0},
        {"variant": "RotJ", "lam": 0.5},
    ],
)
def test_conjugation_validation(kwargs):
    with pytest.raises(SymmetryError):
        ConjugationSpec(**kwargs)


def test_j_apply_is_plain_conjugation():
    v = np.array([1 + 1j, 2.0, -1j])
    assert_allclose(ConjugationSpec.j().apply(v), np.conj(v))
    assert_allclose(ConjugationSpec.rotated(-1.0).apply(v), [1 - 1j, -2.0, 1j])


def test_weighted_conjugation_axioms():
    axioms = conjugation_axioms(ConjugationSpec.weighted(0.4 + 0.2j), 256, 32)
    assert axioms["symmetric"] < 1e-12
    assert axioms["unitary"] < 1e-8
    assert axioms["involution"] < 1e-8


def test_j_form_operator_is_j_symmetric():
    A = weighted_composition_matrix(COMPACT.psi, COMPACT.phi, 64)
    report = is_c_symmetric(A, ConjugationSpec.j(), 16, 1e-10)
    assert report.verdict
    payload = report.to_json()
    assert payload["variant"] == VARIANT_J
    assert payload["verdict"] is True


def test_mismatched_weight_is_not_j_symmetric():
    phi = LFMap(0.24, 0.2, -0.3, 1.0)
    A = weighted_composition_matrix(Rational.constant(1.0), phi, 64)
    report = is_c_symmetric(A, ConjugationSpec.j(), 16, 1e-6)
    assert not report.verdict
    assert report.residual >= 0.2 - 1e-12


def test_block_size_is_checked():
    A = OpMatrix(np.eye(8))
    with pytest.raises(DimensionError):
        symmetry_residual(A, A, 5)
    with pytest.raises(DimensionError):
        symmetry_residual(A, OpMatrix(np.eye(6)), 2)


def test_classify_unitary_weighted():
    result = classify_unitary_j_symmetric(psi_p(0.5), phi_p(0.5))
    assert result.kind == UNITARY_J_SYMMETRIC
    assert result.p == pytest.approx(0.5)
    assert result.c == pytest.approx(1.0)


def test_classify_unitary_rotation():
    result = classify_unitary_j_symmetric(Rational.constant(1j), rotation(-1.0))
    assert result.kind == UNITARY_J_SYMMETRIC_ROTATION
    assert result.mu == pytest.approx(1j)
    assert result.lam == pytest.approx(-1.0)


def test_classify_unitary_rejects_rotated_automorphism():
    phi = LFMap(-1j, 0.5j, -0.5, 1.0)
    result = classify_unitary_j_symmetric(psi_p(0.5), phi)
    assert result.kind == NOT_UNITARY_J_SYMMETRIC


def test_construct_weighted_is_symmetric():
    conj = ConjugationSpec.weighted(0.5)
    psi_t, phi_t = construct_symmetric(conj, COMPACT)
    report = is_c_symmetric(weighted_composition_matrix(psi_t, phi_t, 96), conj, 32, 1e-6)
    assert report.verdict


def test_construct_rotation_example():
    conj = ConjugationSpec.rotated(1j)
    psi_t, phi_t = construct_symmetric(conj, NormalFormJ(0.0, 0.5, 1.0))
    assert psi_t.is_constant()
    assert psi_t(0.3) == pytest.approx(1.0)
    assert equivalent(phi_t, LFMap(0.5j, 0.0, 0.0, 1.0))


def test_construct_rejects_j_and_constant_forms():
    with pytest.raises(SymmetryError):
        construct_symmetric(ConjugationSpec.j(), COMPACT)
    with pytest.raises(SymmetryError):
        construct_symmetric(ConjugationSpec.weighted(0.5), NormalFormJ(0.2, 0.0, 1.0))


def test_factor_recovers_normal_form():
    conj = ConjugationSpec.weighted(0.5)
    psi_t, phi_t = construct_symmetric(conj, COMPACT)
    result = factor_symmetric(psi_t, phi_t, conj)
    assert result.factorable
    assert result.normal_form.a0 == pytest.approx(0.2, abs=1e-10)
    assert result.normal_form.a1 == pytest.approx(0.3, abs=1e-10)
    assert result.normal_form.b == pytest.approx(1.0, abs=1e-10)


def test_factor_of_conjugation_itself_is_identity():
    conj = ConjugationSpec.weighted(0.5)
    result = factor_symmetric(psi_p(0.5), phi_p(0.5), conj)
    assert result.factorable
    assert result.psi.is_constant()
    assert result.psi(0.0) == pytest.approx(1.0)
    assert equivalent(result.phi, identity())


def test_factor_detects_non_symmetric_operator():
    result = factor_symmetric(Rational.constant(1.0), phi_p(0.5), ConjugationSpec.weighted(0.5))
    assert not result.factorable


def test_factor_rotation_round_trip():
    conj = ConjugationSpec.rotated(1j)
    psi_t, phi_t = construct_symmetric(conj, COMPACT)
    result = factor_symmetric(psi_t, phi_t, conj)
    assert result.factorable
    assert result.normal_form.a0 == pytest.approx(0.2, abs=1e-10)


def test_factor_rejects_j():
    with pytest.raises(SymmetryError):
        factor_symmetric(COMPACT.psi, COMPACT.phi, ConjugationSpec.j())


def test_transfer_and_split():
    A = weighted_composition_matrix(COMPACT.psi, COMPACT.phi, 256)
    U = ConjugationSpec.weighted(0.3 + 0.2j).realize(256)
    before, after = transfer_residuals(U, A, 32)
    assert before < 1e-12
    assert after < 1e-6
    factor, residual = split_symmetric(U @ A, U, 32)
    assert residual < 1e-6
    assert np.abs(factor.block(32) - A.block(32)).max() < 1e-6


def test_isometry_weighted_automorphism():
    phi = LFMap(-1j, 0.4j, -0.4, 1.0)
    result = check_isometry(psi_p(0.4), phi, 256, 32)
    assert result.verdict == UNITARY_WITH_CONJUGATION
    assert result.conjugation.variant == VARIANT_WEIGHTED
    assert result.conjugation.p == pytest.approx(0.4)
    assert result.conjugation.c == pytest.approx(1.0)
    assert result.gamma == pytest.approx(1j)
    assert result.decomposition_residual < 1e-8


@pytest.mark.parametrize(
    "psi, phi",
    [
        (psi_p(0.4), LFMap(-1j, 0.4j, -0.4, 1.0)),
        (psi_p(0.5), phi_p(0.5)),
        (psi_p(0.3 + 0.3j, 1j), phi_p(0.3 + 0.3j)),
        (Rational.constant(1j), rotation(1j)),
    ],
)
def test_symmetric_isometries_are_co_isometries(psi, phi):
    result = check_isometry(psi, phi, 256, 32)
    assert result.isometry_residual < 1e-6
    assert result.symmetry_residual < 1e-6
    assert result.coisometry_residual < 1e-6


def test_isometry_rejects_contraction():
    result = check_isometry(Rational.constant(1.0), LFMap(0.5, 0.0, 0.0, 1.0), 64, 16)
    assert result.verdict == NOT_ISOMETRY
    assert result.isometry_residual == pytest.approx(1.0 - 0.25**15, abs=1e-12)


def test_isometry_of_identity_uses_j():
    result = check_isometry(Rational.constant(1.0), identity(), 64, 16)
    assert result.verdict == UNITARY_WITH_CONJUGATION
    assert result.conjugation.variant == VARIANT_J


def test_isometry_of_unmatched_automorphism():
    # composition with phi_p alone is not isometric on H^2
    result = check_isometry(Rational.constant(1.0), phi_p(0.5), 256, 32)
    assert result.verdict in (NOT_ISOMETRY, ISOMETRY_NOT_CS)


def test_unimodular_toeplitz_is_skew_not_symmetric():
    result = unimodular_toeplitz_operator(0.4, 128, M=32, phase_steps=36)
    assert result.symbol_norm == pytest.approx(1.0, abs=1e-10)
    assert result.skew_residual < 1e-6
    assert not result.report.verdict
    assert result.report.residual > 1e-3
    assert_allclose(result.phase_residuals, result.report.residual, rtol=1e-9)
    assert result.best_phase is not None


def test_unimodular_toeplitz_unitary_part_gap_does_not_shrink_with_n():
    gaps = [unimodular_toeplitz_operator(0.4, N, M=32).unitary_gap for N in (128, 256)]
    assert gaps[0] == pytest.approx(0.136379, abs=1e-4)
    assert abs(gaps[0] - gaps[1]) < 1e-4


def test_unimodular_toeplitz_defaults():
    result = unimodular_toeplitz_operator(-0.3, 64)
    assert result.report.M == 16
    assert result.unitary_part.N == 64
    assert result.best_phase is None
    assert result.conjugation.p == pytest.approx(-0.3)


@pytest.mark.parametrize("p", [0.4j, 0.0, 1.0, -1.5])
def test_unimodular_toeplitz_parameter_domain(p):
    with pytest.raises(SymmetryError):
        unimodular_toeplitz_operator(p, 64)


def test_realized_conjugation_matches_matrix():
    W = ConjugationSpec.weighted(0.5).realize(16)
    expected = weighted_composition_matrix(psi_p(0.5), phi_p(0.5), 16)
    assert_allclose(W.entries, expected.entries)
    assert math.isclose(abs(W.entries[0, 0]), math.sqrt(0.75))
