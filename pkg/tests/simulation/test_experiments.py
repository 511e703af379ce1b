import pytest

from ncycle_entropic.core.errors import SizeGuardError
from ncycle_entropic.simulation.experiments import (
    TrialOutcome,
    activation_onset,
    appendix_experiment,
    depolarization_check,
    literal_twirl_survey,
    max_bc_over_samples,
    oracle_agreement,
    summarize_trials,
    sweep_epsilons,
    threshold_sweep,
    trial_box,
    trial_rng,
)


def test_trial_generators_depend_only_on_seed_and_index():
    assert trial_rng(3, 7).random() == trial_rng(3, 7).random()
    assert trial_rng(3, 7).random() != trial_rng(3, 8).random()


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
def test_appendix_experiment_activates_every_nonlocal_box(n: int):
    """
    Scenario: Flat random draws topped up with sampled nonlocal boxes, no twirl.
    Verify: At least the required number of nonlocal boxes is tested, all are activated and no local draw is.
    """
    summary = appendix_experiment(n, 10, seed=11, min_nonlocal=6)
    assert summary.trials == 10
    assert summary.nonlocal_count >= 6
    assert summary.sampled_nonlocal == max(0, 6 - (summary.nonlocal_count - summary.sampled_nonlocal))
    assert summary.all_activated
    assert summary.failed == 0
    assert summary.failed_trials == []
    assert summary.worst_margin is not None
    assert summary.worst_margin > 1e-9


def test_appendix_experiment_with_twirl_activates_sampled_boxes():
    summary = appendix_experiment(5, 0, seed=3, min_nonlocal=8, depolarize_first=True)
    assert summary.depolarized
    assert summary.nonlocal_count == summary.sampled_nonlocal == 8
    assert summary.all_activated


def test_summary_without_nonlocal_boxes_does_not_pass():
    outcomes = [
        TrialOutcome(index=i, is_local=True, found=False, excess=-0.5, normalized_violation=None, log_v_star=None)
        for i in range(3)
    ]
    summary = summarize_trials(5, 3, 0, False, outcomes)
    assert summary.nonlocal_count == 0
    assert not summary.all_activated


@pytest.mark.parametrize("n", [2, 8])
def test_appendix_size_guard(n: int):
    with pytest.raises(SizeGuardError):
        appendix_experiment(n, 1, seed=0)


@pytest.mark.slow
def test_appendix_summary_does_not_depend_on_workers():
    serial = appendix_experiment(4, 24, seed=5, min_nonlocal=6)
    parallel = appendix_experiment(4, 24, seed=5, min_nonlocal=6, workers=2)
    assert serial == parallel


def test_summary_counts_outcomes():
    outcomes = [
        TrialOutcome(index=0, is_local=True, found=False, excess=-0.5, normalized_violation=None, log_v_star=None),
        TrialOutcome(index=1, is_local=False, found=True, excess=0.2, normalized_violation=0.3, log_v_star=-2.0),
        TrialOutcome(index=2, is_local=False, found=True, excess=0.1, normalized_violation=0.01, log_v_star=-40.0),
        TrialOutcome(index=3, is_local=False, found=False, excess=0.1, normalized_violation=None, log_v_star=None),
    ]
    summary = summarize_trials(4, 4, 9, False, outcomes)
    assert (summary.nonlocal_count, summary.activated, summary.failed) == (3, 2, 1)
    assert summary.failed_trials == [3]
    assert summary.worst_margin == 0.01
    assert summary.deepest_log_v == -40.0
    assert not summary.all_activated


def test_sweep_grid_skips_threshold_cell():
    eps = sweep_epsilons(4)
    assert 0.5 not in eps
    assert 0.49 in eps and 0.51 in eps
    assert len(eps) == 100
    assert 0.33 not in sweep_epsilons(3)


def test_threshold_sweep_separates_local_and_nonlocal():
    rows = threshold_sweep(4, [0.2, 0.45, 0.55, 0.9])
    assert [r.found for r in rows] == [False, False, True, True]
    assert all(r.agrees for r in rows)
    assert activation_onset(rows) == 0.55
    assert activation_onset(rows[:2]) is None


def test_oracle_agreement_on_random_boxes():
    """
    Scenario: Flat random squares topped up with sampled nonlocal ones.
    Verify: Both verdicts occur, the oracles never disagree and local certificates re-mix.
    """
    summary = oracle_agreement(4, 25, seed=3, min_nonlocal=5)
    assert summary.local_count > 0
    assert summary.nonlocal_count >= 5
    assert summary.local_count + summary.nonlocal_count == 25 + summary.sampled_nonlocal
    assert summary.disagreements == 0
    assert summary.max_remix_error <= 1e-8
    assert summary.passed


def test_agreement_without_nonlocal_boxes_does_not_pass():
    summary = oracle_agreement(5, 3, seed=2024)
    assert summary.nonlocal_count == 0
    assert not summary.passed


def test_trial_boxes_come_from_separate_streams():
    flat = trial_box(4, 9, 2)
    sampled = trial_box(4, 9, 2, "nonlocal")
    assert flat.label == "random-ns(n=4)"
    assert sampled.label == "random-nonlocal(n=4)"
    assert trial_box(4, 9, 2, "nonlocal").allclose(sampled)


def test_depolarization_contract_holds():
    summary = depolarization_check(5, 12, seed=2)
    assert summary.max_c_error <= 1e-12
    assert summary.max_isotropic_error <= 1e-10
    assert summary.max_idempotence_error <= 1e-12


def test_sampled_bc_stays_below_one_bit():
    assert max_bc_over_samples(5, 30, seed=4) <= 1.0 + 1e-9


def test_literal_survey_counts_are_bounded():
    preserved, agreeing = literal_twirl_survey(4, 6, seed=1)
    assert 0 <= preserved <= 6
    assert 0 <= agreeing <= 6
