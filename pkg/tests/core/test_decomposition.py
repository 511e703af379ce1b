import pytest

from ncycle_entropic.core.decomposition import AppendixVertex, Decomposition, vertex_label_text
from ncycle_entropic.core.errors import InvalidBoxError
from ncycle_entropic.core.gamma import GammaVector


@pytest.mark.parametrize(
    "weights",
    [
        {},
        {(0, 0, 0): 1.2, (1, 1, 1): -0.2},
        {(0, 0, 0): 0.5, (1, 1, 1): 0.4},
    ],
)
def test_invalid_weights_are_rejected(weights: dict):
    with pytest.raises(InvalidBoxError):
        Decomposition(weights)


def test_support_drops_tiny_weights_and_renormalizes():
    decomposition = Decomposition({(0, 0, 0): 0.5, (1, 1, 1): 0.5 - 1e-13, (0, 1, 1): 1e-13})
    support = decomposition.support(1e-12)
    assert len(support) == 2
    assert sum(w for _, w in support.items()) == pytest.approx(1.0, abs=1e-15)


def test_labels_render_per_vertex_kind():
    assert vertex_label_text((0, 1, 0, 1)) == "λ=0101"
    assert vertex_label_text(GammaVector.canonical(3)) == "(+,+,-)"
    assert vertex_label_text(AppendixVertex("det", (0, 1, 0, 1))) == "det[0101]"
    assert vertex_label_text(AppendixVertex("pr", (0, 0, 1))) == "pr[001]"


@pytest.mark.parametrize(("kind", "bits"), [("det", (0, 1, 0)), ("pr", (0, 0, 0, 0)), ("pr", (0, 2, 0))])
def test_appendix_vertex_validates_bits(kind, bits):
    with pytest.raises(ValueError):
        AppendixVertex(kind, bits)


def test_rows_export_labels_and_weights():
    decomposition = Decomposition({GammaVector.canonical(3): 0.25, (0, 0, 0): 0.75})
    assert decomposition.rows() == [("(+,+,-)", 0.25), ("λ=000", 0.75)]
