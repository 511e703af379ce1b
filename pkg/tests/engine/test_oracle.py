import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncycle_entropic.core.box import Box, mix
from ncycle_entropic.core.boxes import (
    classical_box,
    isotropic_box,
    pr_box,
    random_local_box,
    random_nonlocal_box,
    remix,
    white_noise,
)
from ncycle_entropic.core.decomposition import Decomposition
from ncycle_entropic.core.errors import InvalidBoxError, SizeGuardError
from ncycle_entropic.core.gamma import GammaVector
from ncycle_entropic.engine.oracle import (
    LP_ONLY_NOTE,
    MembershipVerdict,
    decompose_local,
    facet_check,
    local_constraints,
    local_support,
)


def _cyclic_shift_box(n: int, d: int) -> Box:
    """x_{i+1} = x_i on every edge but the last, where x_0 = x_{n−1} + 1 mod d."""
    edges = np.zeros((n, d, d))
    for i in range(n):
        step = 1 if i == n - 1 else 0
        for a in range(d):
            edges[i, a, (a + step) % d] = 1.0 / d
    return Box(edges)


def test_facet_check_on_vertices(canonical):
    verdict = facet_check(pr_box(canonical(4)))
    assert not verdict.is_local
    assert verdict.label == "nonlocal"
    assert verdict.gamma == canonical(4)
    assert verdict.excess == pytest.approx(2.0)

    white = facet_check(white_noise(5))
    assert white.is_local
    assert white.gamma is not None
    assert white.excess == pytest.approx(-3.0)


def test_facet_check_needs_two_outcomes():
    with pytest.raises(InvalidBoxError):
        facet_check(white_noise(4, d=3))


def test_decomposition_of_local_box_remixes_exactly():
    """
    Scenario: A random mixture of deterministic points.
    Verify: The recovered weights rebuild the box to within the solver tolerance.
    """
    box = random_local_box(5, 17)
    verdict = decompose_local(box)
    assert verdict.is_local
    assert verdict.method == "lp-decomposition"
    assert verdict.decomposition is not None
    assert remix(verdict.decomposition, 5).max_difference(box) < 1e-8


def test_decomposition_refuses_pr_box(canonical):
    verdict = decompose_local(pr_box(canonical(4)))
    assert not verdict.is_local
    assert verdict.gamma == canonical(4)
    assert verdict.excess == pytest.approx(2.0)
    assert verdict.farkas is None


def test_three_outcome_boxes_get_lp_only_verdicts():
    local = decompose_local(white_noise(3, d=3))
    assert local.is_local
    assert local.note == LP_ONLY_NOTE
    assert local.decomposition is not None
    assert remix(local.decomposition, 3, d=3).max_difference(white_noise(3, d=3)) < 1e-8

    box = _cyclic_shift_box(3, 3)
    refuted = decompose_local(box)
    assert not refuted.is_local
    assert refuted.note == LP_ONLY_NOTE
    assert refuted.farkas is not None
    _, A, b = local_constraints(box)
    y = np.asarray(refuted.farkas)
    assert np.all(A.T @ y <= 1e-9)
    assert float(b @ y) > 0.0


def test_oracles_agree_on_random_boxes(random_box):
    for index in range(30):
        box = random_box(4, index)
        assert facet_check(box).is_local == decompose_local(box).is_local


def test_size_guard_stops_large_problems():
    with pytest.raises(SizeGuardError):
        local_constraints(white_noise(21))


def test_verdict_requires_exactly_one_certificate():
    with pytest.raises(ValueError):
        MembershipVerdict(is_local=True, method="facet-check")


def test_classical_box_splits_evenly_between_constant_assignments():
    verdict = decompose_local(classical_box(GammaVector.all_plus(4)))
    assert verdict.is_local
    assert verdict.decomposition is not None
    weights = dict(verdict.decomposition.support(1e-9).items())
    assert weights == pytest.approx({(0, 0, 0, 0): 0.5, (1, 1, 1, 1): 0.5})


@pytest.mark.parametrize(("epsilon", "is_local"), [(0.5, True), (0.51, False)])
def test_isotropic_square_facet_boundary(epsilon: float, is_local: bool):
    box = isotropic_box(4, epsilon)
    assert facet_check(box).is_local is is_local
    assert decompose_local(box).is_local is is_local


@given(n=st.integers(3, 6), seeds=st.tuples(st.integers(0, 2**32 - 1), st.integers(0, 2**32 - 1)), v=st.floats(0.0, 1.0))
@settings(max_examples=30, deadline=None)
def test_mixing_local_boxes_stays_local(n: int, seeds: tuple[int, int], v: float):
    a, b = (random_local_box(n, s) for s in seeds)
    mixed = mix([a, b], [v, 1.0 - v])
    verdict = decompose_local(mixed)
    assert verdict.is_local
    assert verdict.decomposition is not None
    assert remix(verdict.decomposition, n).max_difference(mixed) <= 1e-8
    assert facet_check(mixed).is_local


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_oracles_agree_on_sampled_nonlocal_boxes(n: int):
    for index in range(10):
        box = random_nonlocal_box(n, np.random.default_rng([n, index]))
        facet = facet_check(box)
        lp = decompose_local(box)
        assert not facet.is_local
        assert not lp.is_local
        assert lp.gamma == facet.gamma


def test_lp_weights_are_rescaled_to_one():
    """
    Scenario: Solver weights overshoot the unit sum by more than a decomposition accepts.
    Verify: The support keeps only positive weights and sums to one exactly enough to validate.
    """
    labels = ((0, 0, 0), (1, 1, 1), (0, 1, 0))
    weights = np.array([0.5 + 4e-9, 0.5 + 4e-9, 0.0])
    with pytest.raises(InvalidBoxError):
        Decomposition(dict(zip(labels, weights.tolist(), strict=True)))
    support = local_support(labels, weights)
    assert len(support) == 2
    assert sum(w for _, w in support.items()) == pytest.approx(1.0, abs=1e-15)
    assert dict(support.items()) == pytest.approx({(0, 0, 0): 0.5, (1, 1, 1): 0.5})
