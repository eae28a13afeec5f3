import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cswco.hardy import OpMatrix, weighted_composition_matrix
from cswco.moebius import LFMap, NormalFormJ, identity, phi_p
from cswco.spectra import (
    DISK,
    POINT_SET,
    RADIUS,
    SPIRAL,
    EigenError,
    EigenResult,
    HypothesisViolation,
    KindMismatchError,
    SpectrumPrediction,
    compare_spectrum,
    eigenvalues,
    gelfand_radius,
    is_power_compact,
    predict_compact,
    predict_disk,
    predict_j_form_radius,
    predict_parabolic_spiral,
    predict_rotation,
    spectral_mapping_residual,
)
from cswco.symmetry import ConjugationSpec, construct_symmetric

COMPACT = NormalFormJ(0.2, 0.3, 1.0)


def test_eigenvalues_are_sorted_by_modulus():
    result = eigenvalues(OpMatrix(np.diag([0.25, 1.0, 0.5])))
    assert result.converged
    assert_allclose(result.eigenvalues, [1.0, 0.5, 0.25])
    assert result.backward_errors.max() < 1e-14
    assert_allclose(result.leading(2), [1.0, 0.5])


def test_eigenvalues_order_limit():
    with pytest.raises(EigenError):
        eigenvalues(OpMatrix(np.eye(513)))


def test_power_compactness():
    assert is_power_compact(COMPACT.phi)
    assert not is_power_compact(LFMap(1.0, 1.0, -1.0, 3.0))
    assert not is_power_compact(phi_p(0.5))
    assert not is_power_compact(identity())


def test_compact_prediction_fixed_point():
    prediction = predict_compact(COMPACT, 0.5)
    assert prediction.kind == POINT_SET
    assert prediction.parameters["w"] == pytest.approx(0.2807, abs=1e-3)
    assert prediction.parameters["derivative"] == pytest.approx(-0.338, abs=1e-3)
    assert prediction.radius == pytest.approx(np.abs(prediction.points).max())
    assert prediction.points[-1] == 0


def test_compact_prediction_matches_eigenvalues():
    psi_t, phi_t = construct_symmetric(ConjugationSpec.weighted(0.5), COMPACT)
    A = weighted_composition_matrix(psi_t, phi_t, 96)
    comparison = compare_spectrum(eigenvalues(A), predict_compact(COMPACT, 0.5), 5, 1e-4)
    assert comparison.passed
    assert len(comparison.pairs) == 5
    payload = comparison.to_json()
    assert payload["pass"] is True
    assert len(payload["eigen"]["leading"]) == 5


def test_wrong_prediction_is_rejected():
    psi_t, phi_t = construct_symmetric(ConjugationSpec.weighted(0.5), COMPACT)
    A = weighted_composition_matrix(psi_t, phi_t, 96)
    comparison = compare_spectrum(eigenvalues(A), predict_compact(COMPACT, 0.45), 5, 1e-4)
    assert not comparison.passed


def test_constant_normal_form_prediction():
    prediction = predict_compact(NormalFormJ(0.0, 0.0, 1.0), 0.5)
    assert_allclose(prediction.points, [math.sqrt(0.75), 0.0])


def test_parabolic_spiral_radius():
    prediction = predict_parabolic_spiral(NormalFormJ.parabolic(1.0), 0.5 + 0.5j)
    assert prediction.kind == SPIRAL
    assert prediction.radius == pytest.approx(1.5)
    assert prediction.parameters["boundary_value_gap"] < 1e-12
    assert prediction.points.size == 65
    moduli = np.abs(prediction.points[:-1])
    assert np.all(np.diff(moduli) <= 1e-15)


def test_parabolic_spiral_custom_grid():
    prediction = predict_parabolic_spiral(NormalFormJ.parabolic(0.5 + 0.25j), 0.5 + 0.5j, b_grid=[0.0, 1.0])
    assert prediction.points.size == 3

    without_origin = predict_parabolic_spiral(NormalFormJ.parabolic(0.5 + 0.25j), 0.5 + 0.5j, b_grid=[1.0, 2.0])
    assert without_origin.points.size == 4
    assert without_origin.radius == pytest.approx(prediction.radius, abs=1e-12)
    assert without_origin.radius == pytest.approx(without_origin.parameters["closed_form_radius"], abs=1e-12)
    assert float(np.abs(without_origin.points).max()) == pytest.approx(without_origin.radius, abs=1e-10)

    with pytest.raises(ValueError):
        predict_parabolic_spiral(NormalFormJ.parabolic(1.0), 0.5 + 0.5j, b_grid=[-1.0, 0.0])


def test_parabolic_spiral_hypotheses():
    with pytest.raises(HypothesisViolation):
        predict_parabolic_spiral(NormalFormJ.parabolic(1.0), 0.2)
    with pytest.raises(HypothesisViolation):
        predict_parabolic_spiral(COMPACT, 0.5 + 0.5j)


def test_disk_prediction():
    prediction = predict_disk(NormalFormJ.parabolic(1.0, -1), -0.5 + 0.5j)
    assert prediction.kind == DISK
    assert prediction.radius == pytest.approx(1.783810, abs=1e-6)
    assert prediction.parameters["derivative_radius"] == pytest.approx(1.5)
    assert prediction.parameters["boundary_derivative"] == pytest.approx(1.0)
    assert prediction.parameters["composite_derivative_gap"] < 1e-12
    assert prediction.parameters["denjoy_wolff"] == pytest.approx(-1.0)
    assert_allclose(np.abs(prediction.points[:-1]), prediction.radius)


def test_disk_hypotheses():
    with pytest.raises(HypothesisViolation) as info:
        predict_disk(NormalFormJ.parabolic(1.0, -1), 0.5 + 0.5j)
    assert "-1" in info.value.condition
    with pytest.raises(HypothesisViolation):
        predict_disk(NormalFormJ.parabolic(1.0, 1), -0.5 + 0.5j)


def test_j_form_radius_at_boundary_points():
    plus = predict_j_form_radius(NormalFormJ.parabolic(1.0, 1))
    minus = predict_j_form_radius(NormalFormJ.parabolic(1.0, -1))
    assert plus.kind == RADIUS
    assert plus.radius == pytest.approx(1.5)
    assert minus.radius == pytest.approx(0.75)


def test_j_form_radius_interior_point():
    prediction = predict_j_form_radius(NormalFormJ(0.2, 0.1, 1.0))
    assert prediction.kind == POINT_SET
    assert prediction.parameters["w"] == pytest.approx((0.94 - 0.7236**0.5) / 0.4, abs=1e-9)
    assert prediction.radius == pytest.approx(1.0 / (1.0 - 0.2 * prediction.parameters["w"].real))


def test_j_form_radius_rejects_automorphism():
    nf = NormalFormJ(0.5, -0.75, 1.0)
    with pytest.raises(HypothesisViolation):
        predict_j_form_radius(nf)


def test_rotation_prediction_matches_eigenvalues():
    psi_t, phi_t = construct_symmetric(ConjugationSpec.rotated(1j), COMPACT)
    A = weighted_composition_matrix(psi_t, phi_t, 96)
    comparison = compare_spectrum(eigenvalues(A), predict_rotation(1j, COMPACT), 5, 1e-4)
    assert comparison.passed


def test_rotation_by_one_reduces_to_j_form():
    assert_allclose(predict_rotation(1.0, COMPACT).points, predict_j_form_radius(COMPACT).points, atol=1e-12)


def test_compare_pairs_by_modulus_then_argument():
    prediction = SpectrumPrediction(POINT_SET, 1.0, np.array([-1.0 + 0j, 1j, 0.5, 1.0, 0j]))
    eig = EigenResult(np.array([1.0 + 1e-7j, -1j * (1 - 1e-6), -1.0, 0.5 + 1e-8j]), np.zeros(4))
    comparison = compare_spectrum(eig, prediction, 4, 1e-4)

    assert [pair.predicted for pair in comparison.pairs] == [1.0, 1j, -1.0, 0.5]
    assert [pair.eigenvalue for pair in comparison.pairs][:3] == [1.0 + 1e-7j, -1.0, -1j * (1 - 1e-6)]
    assert comparison.pairs[1].rel_err == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert not comparison.passed


def test_compare_requires_point_set():
    prediction = predict_j_form_radius(NormalFormJ.parabolic(1.0, 1))
    with pytest.raises(KindMismatchError):
        compare_spectrum(eigenvalues(OpMatrix(np.eye(4))), prediction, 2, 1e-4)


def test_gelfand_radius_of_diagonal():
    sequence = gelfand_radius(OpMatrix(np.diag([1.0, 0.5, 0.25])), 5)
    assert len(sequence) == 5
    assert_allclose(sequence, 1.0, atol=1e-8)


def test_gelfand_radius_of_nilpotent():
    sequence = gelfand_radius(OpMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])), 3)
    assert sequence[0] == pytest.approx(1.0)
    assert sequence[1:] == [0.0, 0.0]
    with pytest.raises(ValueError):
        gelfand_radius(OpMatrix(np.eye(2)), 0)


def test_spectral_mapping_of_random_matrix(rng):
    n = 12
    A = OpMatrix((rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(n))
    assert spectral_mapping_residual(A) < 1e-8
