import threading

import numpy as np
import pytest

from cswco.config import RunConfig
from cswco.moebius import is_self_map_of_disk
from cswco.suite import (
    CRITERIA,
    CriterionOutcome,
    fixed_point_duality_gap,
    random_j_form,
    random_self_map,
    run_suite,
    summarize,
)


def _passing(cfg):
    return CriterionOutcome(True, {"N": cfg.N})


def _failing(cfg):
    return CriterionOutcome(False, {}, ["looked wrong"])


def _crashing(cfg):
    raise ZeroDivisionError("boom")


def test_results_are_sorted_and_crashes_recorded():
    criteria = {"03-crash": _crashing, "01-pass": _passing, "02-fail": _failing}
    results = run_suite(RunConfig(workers=3), criteria)
    assert [result.id for result in results] == ["01-pass", "02-fail", "03-crash"]
    assert results[0].passed and results[0].details == {"N": 96}
    assert not results[1].passed
    assert results[2].error == "ZeroDivisionError: boom"

    summary = summarize(results)
    assert summary["passed"] is False
    assert summary["firstFailure"] == "02-fail"
    assert summary["findings"] == ["looked wrong"]


def test_single_worker_runs_everything():
    criteria = {f"{index:02d}": _passing for index in range(6)}
    results = run_suite(RunConfig(workers=1), criteria)
    assert len(results) == 6
    assert summarize(results)["passed"] is True


def test_stop_event_skips_pending_work():
    stop = threading.Event()
    stop.set()
    results = run_suite(RunConfig(workers=2), {"01": _passing, "02": _passing}, stop_event=stop)
    assert [result.id for result in results] == ["01", "02"]
    assert all(result.skipped and not result.passed for result in results)

    summary = summarize(results)
    assert summary["passed"] is False
    assert summary["skipped"] == ["01", "02"]
    assert summary["firstFailure"] == "01"


def test_random_generators_stay_in_domain(rng):
    for _ in range(50):
        assert is_self_map_of_disk(random_self_map(rng))
        nf = random_j_form(rng)
        assert abs(nf.a0) < 1.0
        assert is_self_map_of_disk(nf.phi)


def test_fixed_point_duality_gap(rng):
    gaps = [fixed_point_duality_gap(random_self_map(rng)) for _ in range(50)]
    checked = [gap for gap in gaps if gap is not None]
    assert checked
    assert max(checked) < 1e-8


@pytest.mark.parametrize("criterion_id", sorted(CRITERIA))
def test_acceptance_criterion(criterion_id):
    outcome = CRITERIA[criterion_id](RunConfig())
    assert outcome.passed, outcome.details


def test_findings_are_reported_for_known_discrepancies():
    cfg = RunConfig()
    assert CRITERIA["05-boundary-automorphisms"](cfg).findings
    assert CRITERIA["07-disk"](cfg).findings
    toeplitz = CRITERIA["09-unimodular-toeplitz"](cfg)
    assert len(toeplitz.findings) == 2
    assert toeplitz.details["unitaryPartBlockUnitary"] is False
    assert not CRITERIA["01-unitary-conjugations"](cfg).findings
    assert np.isfinite(CRITERIA["03-cowen-adjoint"](cfg).details["z/(2-z)"])


def test_property_criteria_draw_two_hundred_cases():
    cfg = RunConfig()
    assert CRITERIA["11a-conjugation-grid"](cfg).details["cases"] == 9 + 200
    assert CRITERIA["11b-unitary-transfer"](cfg).details["cases"] == 200


@pytest.mark.parametrize("criterion_id", ["05-boundary-automorphisms", "07-disk"])
def test_closed_form_criteria_are_labelled(criterion_id):
    details = CRITERIA[criterion_id](RunConfig()).details
    assert details["check"] == "closed-form reproduction"
    assert "radius" in details or "measuredDerivative" in details
