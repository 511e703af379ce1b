"""Convex decompositions of a box over labelled vertices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np

from ncycle_entropic.core.errors import InvalidBoxError
from ncycle_entropic.core.gamma import GammaVector

if TYPE_CHECKING:
    from collections.abc import Iterator

WEIGHT_SUM_TOL = 1e-9
NEGATIVE_WEIGHT_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class AppendixVertex:
    """
    CHSH vertex in the (x, y) labelling: X_0, X_2 are Alice's settings x=0, 1
    and X_1, X_3 are Bob's settings y=0, 1.

    kind "det" carries bits (α, β, γ, δ) with a = αx ⊕ β, b = γy ⊕ δ;
    kind "pr" carries bits (α, β, γ) with a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ.
    """

    kind: Literal["det", "pr"]
    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        expected = 4 if self.kind == "det" else 3
        if len(self.bits) != expected or any(b not in (0, 1) for b in self.bits):
            msg = f"Appendix {self.kind} vertex needs {expected} bits in {{0,1}}, got {self.bits}"
            raise ValueError(msg)

    @property
    def label(self) -> str:
        return f"{self.kind}[{''.join(map(str, self.bits))}]"


VertexLabel = tuple[int, ...] | GammaVector | AppendixVertex


def vertex_label_text(label: VertexLabel) -> str:
    if isinstance(label, GammaVector | AppendixVertex):
        return label.label
    return "λ=" + "".join(map(str, label))


@dataclass(frozen=True, slots=True)
class Decomposition:
    """Weights ρ over vertex labels: deterministic assignments λ, sign vectors γ or appendix vertices."""

    weights: dict[VertexLabel, float]

    def __post_init__(self) -> None:
        if not self.weights:
            msg = "A decomposition needs at least one vertex"
            raise InvalidBoxError(msg)
        values = np.fromiter(self.weights.values(), dtype=np.float64)
        if np.any(values < -NEGATIVE_WEIGHT_TOL):
            msg = f"Decomposition has negative weight {float(values.min())!r}"
            raise InvalidBoxError(msg)
        if abs(float(values.sum()) - 1.0) > WEIGHT_SUM_TOL:
            msg = f"Decomposition weights sum to {float(values.sum())!r}, not 1"
            raise InvalidBoxError(msg)

    def __len__(self) -> int:
        return len(self.weights)

    def items(self) -> Iterator[tuple[VertexLabel, float]]:
        yield from self.weights.items()

    def support(self, threshold: float = 1e-12) -> Decomposition:
        """Copy restricted to weights above `threshold`, renormalized."""
        kept = {k: w for k, w in self.weights.items() if w > threshold}
        total = sum(kept.values())
        return Decomposition({k: w / total for k, w in kept.items()})

    def normalized_weights(self) -> np.ndarray:
        values = np.clip(np.fromiter(self.weights.values(), dtype=np.float64), 0.0, None)
        return values / values.sum()

    def rows(self) -> list[tuple[str, float]]:
        """(label, weight) pairs for CSV export."""
        return [(vertex_label_text(k), float(w)) for k, w in self.weights.items()]
