"""The n-cycle box: one joint outcome table per jointly measurable pair."""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from typing import TYPE_CHECKING

import msgspec
import numpy as np

from ncycle_entropic.core.errors import (
    BoxDocumentError,
    DisturbanceError,
    InvalidBoxError,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from ncycle_entropic.core.types import EdgeSide

CONSTRUCTION_TOL = 1e-12
DATA_TOL = 1e-9


@dataclass(frozen=True, slots=True, eq=False)
class Box:
    """
    Probability model of the n-cycle scenario.

    `edges[i]` is the d×d table p(x_i, x_{i+1} | X_i X_{i+1}) with the first
    axis indexing x_i; the last edge joins X_{n−1} (first axis) and X_0.
    The array is read-only once the box is built.
    """

    edges: npt.NDArray[np.float64]
    label: str | None = None
    tol: InitVar[float] = CONSTRUCTION_TOL

    def __post_init__(self, tol: float) -> None:
        edges = np.array(self.edges, dtype=np.float64, copy=True)
        if edges.ndim != 3 or edges.shape[1] != edges.shape[2]:
            msg = f"Edges must form an (n, d, d) array, got shape {edges.shape}"
            raise InvalidBoxError(msg)
        n, d, _ = edges.shape
        if n < 3:
            msg = f"The n-cycle needs n >= 3 observables, got {n}"
            raise InvalidBoxError(msg)
        if d < 2:
            msg = f"Outcome alphabet needs d >= 2, got {d}"
            raise InvalidBoxError(msg)
        if not np.all(np.isfinite(edges)):
            msg = "Edge tables contain non-finite entries"
            raise InvalidBoxError(msg)
        if np.any(edges < 0.0) or np.any(edges > 1.0 + tol):
            bad = int(np.argwhere((edges < 0.0) | (edges > 1.0 + tol))[0][0])
            msg = f"Edge {bad + 1} has entries outside [0, 1]"
            raise InvalidBoxError(msg)
        sums = edges.sum(axis=(1, 2))
        worst = int(np.argmax(np.abs(sums - 1.0)))
        if abs(sums[worst] - 1.0) > tol:
            msg = f"Edge {worst + 1} sums to {sums[worst]!r}, not 1 (tol {tol:.0e})"
            raise InvalidBoxError(msg)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)

    @property
    def n(self) -> int:
        return int(self.edges.shape[0])

    @property
    def d(self) -> int:
        return int(self.edges.shape[1])

    def edge(self, i: int) -> npt.NDArray[np.float64]:
        return self.edges[i % self.n]

    def marginal(self, i: int, side: EdgeSide = "left") -> npt.NDArray[np.float64]:
        """
        Distribution of X_i read off one of its two edges.

        "left" uses edge (i−1, i), where X_i is the second axis; "right" uses
        edge (i, i+1), where it is the first.
        """
        if not 0 <= i < self.n:
            msg = f"Observable index {i} out of range for n={self.n}"
            raise IndexError(msg)
        if side == "left":
            return self.edges[(i - 1) % self.n].sum(axis=0)
        if side == "right":
            return self.edges[i].sum(axis=1)
        msg = f"Unknown edge side {side!r}"
        raise ValueError(msg)

    def marginals(self, side: EdgeSide = "left") -> npt.NDArray[np.float64]:
        """All single-observable marginals as an (n, d) array."""
        if side == "left":
            return np.roll(self.edges, 1, axis=0).sum(axis=1)
        return self.edges.sum(axis=2)

    def disturbance(self) -> npt.NDArray[np.float64]:
        """Per observable, the largest entrywise gap between its two edge marginals."""
        return np.abs(self.marginals("left") - self.marginals("right")).max(axis=1)

    def is_nondisturbing(self, tol: float = DATA_TOL) -> bool:
        if tol <= 0:
            msg = f"Tolerance must be positive, got {tol}"
            raise ValueError(msg)
        return bool(np.all(self.disturbance() <= tol))

    def require_nondisturbing(self, tol: float = DATA_TOL) -> Box:
        gaps = self.disturbance()
        worst = int(np.argmax(gaps))
        if gaps[worst] > tol:
            raise DisturbanceError(worst, float(gaps[worst]), tol)
        return self

    def require_dichotomic(self) -> Box:
        if self.d != 2:
            msg = f"Operation is defined for dichotomic observables only (d=2), box has d={self.d}"
            raise InvalidBoxError(msg)
        return self

    def with_label(self, label: str | None) -> Box:
        return Box(self.edges, label=label)

    def allclose(self, other: Box, atol: float = CONSTRUCTION_TOL) -> bool:
        return self.edges.shape == other.edges.shape and bool(
            np.allclose(self.edges, other.edges, rtol=0.0, atol=atol),
        )

    def max_difference(self, other: Box) -> float:
        if self.edges.shape != other.edges.shape:
            msg = f"Cannot compare boxes of shapes {self.edges.shape} and {other.edges.shape}"
            raise InvalidBoxError(msg)
        return float(np.abs(self.edges - other.edges).max())

    def to_document(self) -> BoxDocument:
        return BoxDocument(
            n=self.n,
            d=self.d,
            edges=self.edges.tolist(),
            label=self.label,
        )

    @classmethod
    def from_document(cls, doc: BoxDocument, *, tol: float = DATA_TOL) -> Box:
        try:
            edges = np.asarray(doc.edges, dtype=np.float64)
        except ValueError as exc:
            msg = f"Field `edges` is not a rectangular array: {exc}"
            raise BoxDocumentError(msg) from exc
        if edges.shape != (doc.n, doc.d, doc.d):
            msg = f"Field `edges` has shape {edges.shape}, expected ({doc.n}, {doc.d}, {doc.d}) from `n` and `d`"
            raise BoxDocumentError(msg)
        try:
            return cls(edges, label=doc.label, tol=tol)
        except InvalidBoxError as exc:
            msg = f"Field `edges`: {exc}"
            raise BoxDocumentError(msg) from exc


class BoxDocument(msgspec.Struct, kw_only=True):
    """On-disk box: `n`, `d`, `edges` as n row-major d×d arrays, optional `label`."""

    n: int
    d: int
    edges: list[list[list[float]]]
    label: str | None = None


def encode_box(box: Box) -> bytes:
    """JSON with shortest round-trip float literals, so decoding is bit-exact."""
    return msgspec.json.format(msgspec.json.encode(box.to_document()), indent=2)


def decode_box(data: bytes | str, *, tol: float = DATA_TOL) -> Box:
    try:
        doc = msgspec.json.decode(data, type=BoxDocument)
    except msgspec.ValidationError as exc:
        msg = f"Invalid box document: {exc}"
        raise BoxDocumentError(msg) from exc
    except msgspec.DecodeError as exc:
        msg = f"Malformed box document: {exc}"
        raise BoxDocumentError(msg) from exc
    return Box.from_document(doc, tol=tol)


def mix(
    boxes: Sequence[Box],
    weights: Sequence[float] | npt.NDArray[np.float64],
    *,
    label: str | None = None,
) -> Box:
    """Edgewise convex combination Σ_j w_j B_j."""
    if not boxes:
        msg = "Cannot mix an empty sequence of boxes"
        raise InvalidBoxError(msg)
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (len(boxes),):
        msg = f"Got {w.size} weights for {len(boxes)} boxes"
        raise InvalidBoxError(msg)
    shape = boxes[0].edges.shape
    if any(b.edges.shape != shape for b in boxes):
        msg = "All mixed boxes must share n and d"
        raise InvalidBoxError(msg)
    if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > CONSTRUCTION_TOL:
        msg = f"Mixing weights must be non-negative and sum to 1, got sum {float(w.sum())!r}"
        raise InvalidBoxError(msg)
    stacked = np.stack([b.edges for b in boxes])
    return Box(np.tensordot(w, stacked, axes=1), label=label)
