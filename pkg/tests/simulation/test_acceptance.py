import pytest

from ncycle_entropic.simulation.acceptance import (
    AcceptanceScale,
    check_appendix,
    check_entropic_blindness,
    check_expansion,
    check_max_violation,
    check_oracles,
    check_threshold,
    check_vertices_and_bound,
    expansion_errors,
    run_acceptance,
    survey_literal_twirl,
)
from ncycle_entropic.simulation.config import RunConfig


def test_closed_form_checks_pass():
    for check in (check_max_violation, check_entropic_blindness, check_expansion):
        rows = check()
        assert rows
        assert all(r.passed for r in rows), [r.criterion for r in rows if not r.passed]


def test_expansion_errors_shrink():
    err5, err6 = expansion_errors(5, 0.7)
    assert err6 < err5 < 0.05


def test_vertex_counts_and_sampled_bound():
    rows = check_vertices_and_bound(RunConfig(seed=3), trials=10)
    assert [r.criterion for r in rows] == ["vertex counts n=4", "BC upper bound"]
    assert rows[0].measured == "16+8"
    assert all(r.passed for r in rows)


def test_literal_survey_is_informational():
    rows = survey_literal_twirl(RunConfig(), trials=3)
    assert all(r.informational and r.passed for r in rows)


@pytest.mark.slow
def test_threshold_onsets_sit_next_to_threshold():
    for row in check_threshold(RunConfig()):
        assert row.passed
        assert isinstance(row.measured, float)
        assert isinstance(row.expected, float)
        # the sweep skips ±0.005 around the threshold on a 0.01 grid
        assert 0.0 < row.measured - row.expected < 0.016


@pytest.mark.slow
def test_quick_acceptance_run_passes():
    rows = run_acceptance(RunConfig(), AcceptanceScale.quick())
    assert [r.criterion for r in rows if not r.passed] == []
    assert any(r.informational for r in rows)


def test_appendix_rows_cover_both_twirl_settings():
    rows = check_appendix(RunConfig(seed=4), trials=2, quota=3)
    assert [r.criterion for r in rows] == [
        *(f"no-twirl activation n={n}" for n in range(3, 8)),
        *(f"twirled activation n={n}" for n in range(3, 8)),
    ]
    assert all(r.passed and r.measured == 1.0 for r in rows)


def test_agreement_rows_fail_without_nonlocal_boxes():
    rows = check_oracles(RunConfig(seed=2024), trials=3, quota=0)
    assert not rows[-1].passed
    assert check_oracles(RunConfig(seed=2024), trials=3, quota=2)[-1].passed


def test_scales_demand_nonlocal_boxes():
    assert AcceptanceScale.full().nonlocal_quota == 1000
    assert AcceptanceScale.quick().nonlocal_quota > 0
