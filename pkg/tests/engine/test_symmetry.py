import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ncycle_entropic.core.boxes import isotropic_box, pr_box, random_nonlocal_box, random_ns_box, white_noise
from ncycle_entropic.core.errors import InvalidOperationError
from ncycle_entropic.core.gamma import GammaVector
from ncycle_entropic.engine.inequalities import all_c_values, bc_values, c_value, correlators, odd_gammas
from ncycle_entropic.engine.symmetry import (
    CyclicShift,
    EdgeDoubleFlip,
    LocalOperation,
    align_to_canonical,
    apply,
    compare_twirl_readings,
    depolarize,
    isotropic_weight,
    literal_step_two_terms,
    twirl_group,
)


def test_flip_moves_sign_vector_onto_canonical(canonical):
    """
    Scenario: The -1 sits on the first edge.
    Verify: Flipping X2, X3 and X4 turns the PR box into the canonical one.
    """
    gamma = GammaVector.of(-1, 1, 1, 1)
    op = LocalOperation.flip({1, 2, 3})
    assert op.transform_gamma(gamma) == canonical(4)
    assert apply(op, pr_box(gamma)).allclose(pr_box(canonical(4)))


def test_shift_relabels_edges(canonical):
    box = pr_box(canonical(5))
    shifted = apply(LocalOperation.shift(1), box)
    np.testing.assert_allclose(correlators(shifted), [1, 1, 1, -1, 1])
    assert LocalOperation.shift(1).transform_gamma(canonical(5)) == GammaVector.of(1, 1, 1, -1, 1)


def test_transform_gamma_preserves_c_value(random_box):
    box = random_box(5, 3)
    op = LocalOperation.shift(2).then(LocalOperation.flip({0, 3})).then(LocalOperation((EdgeDoubleFlip(1),)))
    moved = apply(op, box)
    for gamma in odd_gammas(5):
        assert c_value(moved, op.transform_gamma(gamma)) == pytest.approx(c_value(box, gamma), abs=1e-12)


def test_operation_inverse_restores_box(random_box):
    box = random_box(4, 8)
    op = LocalOperation.flip({2}).then(LocalOperation.shift(3))
    assert apply(op.then(op.inverse()), box).allclose(box)


def test_rendering_uses_one_based_labels():
    op = LocalOperation.flip({0, 2}).then(LocalOperation.shift(1)).then(LocalOperation((EdgeDoubleFlip(1),)))
    assert op.render() == "flip{X1,X3} ; shift(+1) ; double-flip(edge 2)"
    assert op.to_atoms() == ["flip{X1,X3}", "shift(+1)", "double-flip(edge 2)"]
    assert LocalOperation.identity().render() == "identity"
    assert CyclicShift(-2).render() == "shift(-2)"


@pytest.mark.parametrize("op", [LocalOperation.flip({4}), LocalOperation((EdgeDoubleFlip(7),))])
def test_out_of_range_atoms_are_rejected(op: LocalOperation):
    with pytest.raises(InvalidOperationError):
        apply(op, white_noise(4))


@pytest.mark.parametrize("n", range(3, 8))
def test_twirl_group_has_order_two_n(n: int, canonical):
    group = twirl_group(canonical(n))
    assert group.order == 2 * n
    assert group.permutations.shape == (2 * n, 4 * n)


def test_twirl_elements_stabilize_target_and_noise(canonical):
    gamma = canonical(5)
    for op in twirl_group(gamma).elements:
        assert op.transform_gamma(gamma) == gamma
        assert apply(op, pr_box(gamma)).allclose(pr_box(gamma))
        assert apply(op, white_noise(5)).allclose(white_noise(5))


@pytest.mark.parametrize("n", [3, 4, 6])
def test_depolarize_gives_isotropic_box_with_same_c(n: int, random_box):
    """
    Scenario: Twirl random nonsignalling boxes against every odd sign vector.
    Verify: C^γ is unchanged, the result is ε·PR + (1 − ε)·white with ε = C/n, and twirling twice changes nothing.
    """
    for index, gamma in enumerate(odd_gammas(n)):
        box = random_box(n, index)
        twirled = depolarize(box, gamma)
        assert c_value(twirled, gamma) == pytest.approx(c_value(box, gamma), abs=1e-12)
        eps = isotropic_weight(box, gamma)
        expected = eps * pr_box(gamma).edges + (1.0 - eps) * white_noise(n).edges
        np.testing.assert_allclose(twirled.edges, expected, atol=1e-12)
        assert depolarize(twirled, gamma).max_difference(twirled) <= 1e-12


def test_align_to_canonical(canonical):
    box = isotropic_box(4, 0.8, GammaVector.of(1, -1, 1, 1))
    aligned, op = align_to_canonical(box)
    assert aligned.allclose(isotropic_box(4, 0.8), atol=1e-12)
    assert op.transform_gamma(GammaVector.of(1, -1, 1, 1)) == canonical(4)

    local_box, identity = align_to_canonical(isotropic_box(4, 0.3))
    assert identity.is_identity
    assert local_box.allclose(isotropic_box(4, 0.3))


def test_literal_terms_start_with_global_flip():
    terms = literal_step_two_terms(4)
    assert len(terms) == 4
    assert terms[0].render() == "shift(+0) ; flip{X1,X2,X3,X4}"
    assert terms[3].render() == "shift(+3) ; flip{X1,X2}"


def test_literal_reading_does_not_keep_c_of_pr_box(canonical):
    """
    Scenario: Average the canonical PR box over the literal shift-and-flip terms.
    Verify: Only the unshifted term keeps C^γ = 4, so the average drops to 1 while the group twirl keeps 4.
    """
    comparison = compare_twirl_readings(pr_box(canonical(4)))
    assert comparison.c_before == pytest.approx(4.0)
    assert comparison.c_group == pytest.approx(4.0)
    assert comparison.c_literal == pytest.approx(1.0)
    assert not comparison.literal_preserves_c
    assert not comparison.agree


@given(
    n=st.integers(3, 7),
    seed=st.integers(0, 2**32 - 1),
    offset=st.integers(-7, 7),
    flips=st.sets(st.integers(0, 6)),
    nonlocal_draw=st.booleans(),
)
@settings(max_examples=40, deadline=None)
def test_relabeling_keeps_both_value_multisets(n: int, seed: int, offset: int, flips: set[int], nonlocal_draw: bool):
    """
    Scenario: Output flips followed by a cyclic shift on random boxes.
    Verify: The sorted C values and the sorted BC values are unchanged.
    """
    box = random_nonlocal_box(n, seed) if nonlocal_draw else random_ns_box(n, seed)
    op = LocalOperation.flip({j for j in flips if j < n}).then(LocalOperation.shift(offset))
    moved = apply(op, box)
    assert moved.is_nondisturbing()
    np.testing.assert_allclose(np.sort(all_c_values(moved)), np.sort(all_c_values(box)), atol=1e-12)
    np.testing.assert_allclose(np.sort(bc_values(moved)), np.sort(bc_values(box)), atol=1e-12)
