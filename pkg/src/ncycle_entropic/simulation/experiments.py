"""Seeded batch experiments over random nonsignalling boxes."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import msgspec
import numpy as np
from tqdm import tqdm

from ncycle_entropic.core.box import DATA_TOL
from ncycle_entropic.core.boxes import (
    isotropic_box,
    pr_box,
    random_nonlocal_box,
    random_ns_box,
    remix,
    white_noise,
)
from ncycle_entropic.core.errors import SizeGuardError
from ncycle_entropic.engine.activation import ActivationGrid, activation_search
from ncycle_entropic.engine.inequalities import VIOLATION_TOL, bc_values, c_value, odd_gammas
from ncycle_entropic.engine.logging import run_context
from ncycle_entropic.engine.oracle import decompose_local, facet_check
from ncycle_entropic.engine.symmetry import compare_twirl_readings, depolarize

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from ncycle_entropic.core.box import Box
    from ncycle_entropic.core.gamma import GammaVector

logger = logging.getLogger("ncycle_entropic").getChild("experiments")

APPENDIX_MIN_N = 3
APPENDIX_MAX_N = 7
THRESHOLD_MARGIN = 0.005
REMIX_TOL = 1e-8

# Stream tag separating nonlocal top-up draws from the flat draws of the same index.
NONLOCAL_STREAM = 1

BoxSource = Literal["ns", "nonlocal"]
TrialJob = tuple[int, int, int, float, ActivationGrid, bool, BoxSource]


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for one trial, independent of execution order."""
    return np.random.default_rng([seed, index])


def trial_box(n: int, seed: int, index: int, source: BoxSource = "ns") -> Box:
    """
    Box of one trial: a flat-Dirichlet nonsignalling draw, or a draw from the
    nonlocal sampler on its own stream.
    """
    if source == "nonlocal":
        return random_nonlocal_box(n, np.random.default_rng([seed, index, NONLOCAL_STREAM]))
    return random_ns_box(n, trial_rng(seed, index))


def check_appendix_size(n: int, conjecture: bool) -> None:
    if n < APPENDIX_MIN_N or (n > APPENDIX_MAX_N and not conjecture):
        msg = f"Random-box activation is guarded to {APPENDIX_MIN_N} <= n <= {APPENDIX_MAX_N}; pass conjecture mode to run n={n}"
        raise SizeGuardError(msg)


# --- appendix experiment ------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TrialOutcome:
    index: int
    is_local: bool
    found: bool
    excess: float
    normalized_violation: float | None
    log_v_star: float | None
    source: BoxSource = "ns"


class AppendixSummary(msgspec.Struct, kw_only=True):
    n: int
    trials: int
    seed: int
    depolarized: bool
    nonlocal_count: int
    sampled_nonlocal: int = 0
    activated: int
    failed: int
    local_activated: int
    worst_margin: float | None
    deepest_log_v: float | None
    failed_trials: list[int] = msgspec.field(default_factory=list)

    @property
    def all_activated(self) -> bool:
        """Every nonlocal box activated, none of the local ones, and at least one nonlocal box seen."""
        return self.nonlocal_count > 0 and self.activated == self.nonlocal_count and self.local_activated == 0


def _run_trial(
    n: int,
    seed: int,
    index: int,
    tol: float,
    grid: ActivationGrid,
    depolarize_first: bool,
    source: BoxSource,
) -> TrialOutcome:
    box = trial_box(n, seed, index, source)
    result = activation_search(box, tol, grid, depolarize_first=depolarize_first)
    return TrialOutcome(
        index=index,
        is_local=result.locally_explained,
        found=result.found,
        excess=result.excess,
        normalized_violation=result.normalized_violation,
        log_v_star=result.log_v_star,
        source=source,
    )


def _run_trial_packed(args: TrialJob) -> TrialOutcome:
    return _run_trial(*args)


def _run_batch(
    jobs: list[TrialJob],
    workers: int,
    desc: str,
    progress: bool,
) -> list[TrialOutcome]:
    if not jobs:
        return []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            mapped = pool.map(_run_trial_packed, jobs, chunksize=max(1, len(jobs) // (8 * workers)))
            return list(tqdm(mapped, total=len(jobs), desc=desc, unit="box", disable=not progress))
    context = run_context()
    outcomes: list[TrialOutcome] = []
    for job in tqdm(jobs, desc=desc, unit="box", disable=not progress):
        context.start_trial(job[2])
        outcomes.append(_run_trial_packed(job))
    context.end_trial()
    return outcomes


def appendix_experiment(
    n: int,
    trials: int,
    seed: int,
    *,
    min_nonlocal: int = 0,
    conjecture: bool = False,
    depolarize_first: bool = False,
    tol: float = VIOLATION_TOL,
    grid: ActivationGrid | None = None,
    workers: int = 1,
    progress: bool = False,
) -> AppendixSummary:
    """
    Activate random nonsignalling boxes without the twirl.

    `trials` flat-Dirichlet draws come first. If fewer than `min_nonlocal` of
    them are nonlocal, the run continues with nonlocal-sampler draws at
    indices trials, trials + 1, ... until the count is reached. Every trial
    draws from its own generator seeded by (seed, index), so the summary does
    not depend on `workers`.
    """
    check_appendix_size(n, conjecture)
    if trials < 0 or min_nonlocal < 0:
        msg = f"Trial counts must be non-negative, got trials={trials}, min_nonlocal={min_nonlocal}"
        raise ValueError(msg)
    grid = ActivationGrid() if grid is None else grid
    jobs: list[TrialJob] = [(n, seed, i, tol, grid, depolarize_first, "ns") for i in range(trials)]
    outcomes = _run_batch(jobs, workers, f"n={n}", progress)

    seen = sum(1 for o in outcomes if not o.is_local)
    top_up = max(0, min_nonlocal - seen)
    if top_up:
        logger.info("n=%d: %d of %d flat draws nonlocal, sampling %d more", n, seen, trials, top_up)
        extra: list[TrialJob] = [(n, seed, i, tol, grid, depolarize_first, "nonlocal") for i in range(trials, trials + top_up)]
        outcomes.extend(_run_batch(extra, workers, f"n={n} nonlocal", progress))

    outcomes.sort(key=lambda o: o.index)
    return summarize_trials(n, trials, seed, depolarize_first, outcomes)


def summarize_trials(
    n: int,
    trials: int,
    seed: int,
    depolarized: bool,
    outcomes: Sequence[TrialOutcome],
) -> AppendixSummary:
    nonlocal_ = [o for o in outcomes if not o.is_local]
    activated = [o for o in nonlocal_ if o.found]
    failed = [o.index for o in nonlocal_ if not o.found]
    margins = [o.normalized_violation for o in activated if o.normalized_violation is not None]
    depths = [o.log_v_star for o in activated if o.log_v_star is not None]
    if failed:
        logger.warning("n=%d: %d nonlocal boxes not activated (first trial %d)", n, len(failed), failed[0])
    if not nonlocal_:
        logger.warning("n=%d: no nonlocal box among %d draws; nothing was tested", n, len(outcomes))
    return AppendixSummary(
        n=n,
        trials=trials,
        seed=seed,
        depolarized=depolarized,
        nonlocal_count=len(nonlocal_),
        sampled_nonlocal=sum(1 for o in outcomes if o.source == "nonlocal"),
        activated=len(activated),
        failed=len(failed),
        local_activated=sum(1 for o in outcomes if o.is_local and o.found),
        worst_margin=min(margins) if margins else None,
        deepest_log_v=min(depths) if depths else None,
        failed_trials=failed,
    )


# --- isotropic threshold sweep ------------------------------------------------


class SweepRow(msgspec.Struct, kw_only=True):
    n: int
    epsilon: float
    nonlocal_expected: bool
    found: bool
    log_v_star: float | None

    @property
    def agrees(self) -> bool:
        return self.found == self.nonlocal_expected


def sweep_epsilons(n: int, step: float = 0.01, margin: float = THRESHOLD_MARGIN) -> list[float]:
    """ε in [0, 1] on a fixed grid, without the cell around (n − 2)/n."""
    threshold = (n - 2) / n
    count = round(1.0 / step)
    values = [round(i * step, 10) for i in range(count + 1)]
    return [eps for eps in values if abs(eps - threshold) > margin]


def threshold_sweep(
    n: int,
    epsilons: Iterable[float] | None = None,
    *,
    tol: float = VIOLATION_TOL,
    grid: ActivationGrid | None = None,
) -> list[SweepRow]:
    threshold = (n - 2) / n
    rows: list[SweepRow] = []
    for eps in sweep_epsilons(n) if epsilons is None else epsilons:
        result = activation_search(isotropic_box(n, eps), tol, grid)
        rows.append(
            SweepRow(
                n=n,
                epsilon=eps,
                nonlocal_expected=eps > threshold,
                found=result.found,
                log_v_star=result.log_v_star,
            ),
        )
    return rows


def activation_onset(rows: Sequence[SweepRow]) -> float | None:
    """Smallest ε in the sweep that activated."""
    found = [r.epsilon for r in rows if r.found]
    return min(found) if found else None


# --- oracle agreement ---------------------------------------------------------


class AgreementSummary(msgspec.Struct, kw_only=True):
    n: int
    trials: int
    seed: int
    local_count: int
    nonlocal_count: int
    sampled_nonlocal: int = 0
    disagreements: int
    max_remix_error: float

    @property
    def passed(self) -> bool:
        """Both verdicts seen, the oracles never disagree and every certificate re-mixes."""
        return (
            self.local_count > 0
            and self.nonlocal_count > 0
            and self.disagreements == 0
            and self.max_remix_error <= REMIX_TOL
        )


def oracle_agreement(
    n: int,
    trials: int,
    seed: int,
    *,
    min_nonlocal: int = 0,
    tol: float = DATA_TOL,
    progress: bool = False,
) -> AgreementSummary:
    """
    Facet check against the LP decomposition on the same random boxes.

    Flat draws are topped up from the nonlocal sampler until `min_nonlocal`
    nonlocal boxes have been compared, so the infeasible branch is exercised.
    """
    context = run_context()
    disagreements = local_count = nonlocal_count = sampled = 0
    worst = 0.0

    def compare(index: int, source: BoxSource) -> None:
        nonlocal disagreements, local_count, nonlocal_count, worst
        context.start_trial(index)
        box = trial_box(n, seed, index, source)
        facet = facet_check(box, tol)
        lp = decompose_local(box, tol)
        if facet.is_local != lp.is_local:
            disagreements += 1
            logger.warning("Oracles disagree (C excess %.3e)", facet.excess or 0.0)
        if not lp.is_local:
            nonlocal_count += 1
        elif lp.decomposition is not None:
            local_count += 1
            worst = max(worst, remix(lp.decomposition, n).max_difference(box))

    for index in tqdm(range(trials), desc=f"agree n={n}", unit="box", disable=not progress):
        compare(index, "ns")
    top_up = max(0, min_nonlocal - nonlocal_count)
    for index in tqdm(range(trials, trials + top_up), desc=f"agree n={n} nonlocal", unit="box", disable=not progress):
        compare(index, "nonlocal")
        sampled += 1
    context.end_trial()
    return AgreementSummary(
        n=n,
        trials=trials,
        seed=seed,
        local_count=local_count,
        nonlocal_count=nonlocal_count,
        sampled_nonlocal=sampled,
        disagreements=disagreements,
        max_remix_error=worst,
    )


# --- depolarization contract --------------------------------------------------


class DepolarizationSummary(msgspec.Struct, kw_only=True):
    n: int
    trials: int
    seed: int
    max_c_error: float
    max_isotropic_error: float
    max_idempotence_error: float


def isotropic_edges(n: int, epsilon: float, gamma: GammaVector) -> np.ndarray:
    """ε·p_max^γ + (1 − ε)·p_w as a raw array; valid for ε in [−1, 1]."""
    return epsilon * pr_box(gamma).edges + (1.0 - epsilon) * white_noise(n).edges


def depolarization_check(n: int, trials: int, seed: int) -> DepolarizationSummary:
    """Twirl random boxes against random odd γ and measure the contract."""
    gammas = odd_gammas(n)
    c_err = iso_err = idem_err = 0.0
    for index in range(trials):
        rng = trial_rng(seed, index)
        box = random_ns_box(n, rng)
        gamma = gammas[int(rng.integers(len(gammas)))]
        twirled = depolarize(box, gamma)
        before = c_value(box, gamma)
        after = c_value(twirled, gamma)
        c_err = max(c_err, abs(after - before))
        expected = isotropic_edges(n, after / n, gamma)
        iso_err = max(iso_err, float(np.abs(twirled.edges - expected).max()))
        idem_err = max(idem_err, depolarize(twirled, gamma).max_difference(twirled))
    return DepolarizationSummary(
        n=n,
        trials=trials,
        seed=seed,
        max_c_error=c_err,
        max_isotropic_error=iso_err,
        max_idempotence_error=idem_err,
    )


def max_bc_over_samples(n: int, trials: int, seed: int) -> float:
    """Largest BC value seen on random nonsignalling boxes."""
    return max(float(bc_values(random_ns_box(n, trial_rng(seed, i))).max()) for i in range(trials))


def literal_twirl_survey(n: int, trials: int, seed: int) -> tuple[int, int]:
    """(boxes whose C survives the literal shift-and-flip average, boxes agreeing with the group twirl)."""
    preserved = agreeing = 0
    for index in range(trials):
        comparison = compare_twirl_readings(random_ns_box(n, trial_rng(seed, index)))
        preserved += comparison.literal_preserves_c
        agreeing += comparison.agree
    return preserved, agreeing
