"""Local reversible operations and the depolarization twirl."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from ncycle_entropic.core.box import DATA_TOL, Box
from ncycle_entropic.core.errors import InvalidBoxError, InvalidOperationError
from ncycle_entropic.core.gamma import GammaVector, flip_set_between
from ncycle_entropic.engine.inequalities import VIOLATION_TOL, c_value, most_violated

if TYPE_CHECKING:
    from collections.abc import Iterable

    import numpy.typing as npt

    from ncycle_entropic.core.types import AtomKind

logger = logging.getLogger("ncycle_entropic").getChild("symmetry")


@dataclass(frozen=True, slots=True)
class OutputFlip:
    """x_j → d−1−x_j for every observable j in the set (x ⊕ 1 when d = 2)."""

    observables: frozenset[int]
    kind: ClassVar[AtomKind] = "output-flip"

    def inverse(self) -> OutputFlip:
        return self

    def render(self) -> str:
        names = ",".join(f"X{j + 1}" for j in sorted(self.observables))
        return f"flip{{{names}}}"


@dataclass(frozen=True, slots=True)
class CyclicShift:
    """Relabel X_i → X_{i−offset}: edge i of the result is edge i+offset of the input."""

    offset: int
    kind: ClassVar[AtomKind] = "cyclic-shift"

    def inverse(self) -> CyclicShift:
        return CyclicShift(-self.offset)

    def render(self) -> str:
        return f"shift({self.offset:+d})"


@dataclass(frozen=True, slots=True)
class EdgeDoubleFlip:
    """
    Flip both outputs on a single edge.

    Correlators and entropies are untouched, but the marginals of the two
    endpoints now disagree with their other edges unless they are uniform;
    applied to every edge it is the global output flip.
    """

    edge: int
    kind: ClassVar[AtomKind] = "edge-double-flip"

    def inverse(self) -> EdgeDoubleFlip:
        return self

    def render(self) -> str:
        return f"double-flip(edge {self.edge + 1})"


Atom = OutputFlip | CyclicShift | EdgeDoubleFlip


@dataclass(frozen=True, slots=True)
class LocalOperation:
    """Ordered sequence of atoms; the first atom acts first."""

    atoms: tuple[Atom, ...] = ()

    @classmethod
    def identity(cls) -> LocalOperation:
        return cls(())

    @classmethod
    def flip(cls, observables: Iterable[int]) -> LocalOperation:
        chosen = frozenset(observables)
        return cls((OutputFlip(chosen),)) if chosen else cls.identity()

    @classmethod
    def shift(cls, offset: int) -> LocalOperation:
        return cls((CyclicShift(offset),))

    @classmethod
    def global_flip(cls, n: int) -> LocalOperation:
        return cls.flip(range(n))

    @property
    def is_identity(self) -> bool:
        return not self.atoms

    def __len__(self) -> int:
        return len(self.atoms)

    def then(self, other: LocalOperation) -> LocalOperation:
        return LocalOperation(self.atoms + other.atoms)

    def inverse(self) -> LocalOperation:
        return LocalOperation(tuple(a.inverse() for a in reversed(self.atoms)))

    def render(self) -> str:
        return " ; ".join(a.render() for a in self.atoms) if self.atoms else "identity"

    def to_atoms(self) -> list[str]:
        """Readable atom list for certificate output."""
        return [a.render() for a in self.atoms]

    def validate(self, n: int) -> None:
        for atom in self.atoms:
            match atom:
                case OutputFlip(observables=obs) if any(not 0 <= j < n for j in obs):
                    msg = f"{atom.render()} names observables outside X1..X{n}"
                    raise InvalidOperationError(msg)
                case EdgeDoubleFlip(edge=e) if not 0 <= e < n:
                    msg = f"{atom.render()} is out of range for n={n}"
                    raise InvalidOperationError(msg)
                case _:
                    pass

    def transform_gamma(self, gamma: GammaVector) -> GammaVector:
        """The label γ″ with c_value(apply(op, B), γ″) = c_value(B, γ) for every box B."""
        self.validate(gamma.n)
        n = gamma.n
        signs = list(gamma.signs)
        for atom in self.atoms:
            match atom:
                case OutputFlip(observables=obs):
                    for j in obs:
                        signs[j] = -signs[j]
                        signs[(j - 1) % n] = -signs[(j - 1) % n]
                case CyclicShift(offset=s):
                    signs = [signs[(i + s) % n] for i in range(n)]
                case EdgeDoubleFlip():
                    pass
        return GammaVector(tuple(signs))


def _act(op: LocalOperation, edges: np.ndarray) -> np.ndarray:
    """Apply the operation to a raw (n, d, d) array without validation."""
    out = edges
    n = edges.shape[0]
    for atom in op.atoms:
        match atom:
            case OutputFlip(observables=obs):
                out = out.copy()
                for j in obs:
                    out[j] = out[j][::-1, :]
                    out[(j - 1) % n] = out[(j - 1) % n][:, ::-1]
            case CyclicShift(offset=s):
                out = np.roll(out, -s, axis=0)
            case EdgeDoubleFlip(edge=e):
                out = out.copy()
                out[e] = out[e][::-1, ::-1]
    return out


def apply(op: LocalOperation, box: Box) -> Box:
    """Relabel the box; raises InvalidOperationError for atoms outside its range."""
    op.validate(box.n)
    if op.is_identity:
        return box
    return Box(_act(op, box.edges), label=box.label)


@dataclass(frozen=True, slots=True)
class TwirlSpec:
    """
    Finite group of local operations stabilizing p_max^γ and white noise.

    Averaging over `elements` maps every nondisturbing dichotomic box to
    ε·p_max^γ + (1 − ε)·p_w; `permutations[g]` is the flat index map of
    element g on (n, 2, 2) edge arrays.
    """

    target: GammaVector
    elements: tuple[LocalOperation, ...]
    permutations: npt.NDArray[np.intp] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def average(self, box: Box) -> Box:
        flat = box.edges.ravel()
        averaged = flat[self.permutations].mean(axis=0).reshape(box.edges.shape)
        return Box(averaged, label=box.label)


def twirl_generators(gamma: GammaVector) -> tuple[LocalOperation, LocalOperation]:
    """
    Global output flip, and the cyclic shift by one followed by the flips
    that carry the shifted sign vector back to γ.
    """
    compensating = flip_set_between(gamma.shifted(1), gamma)
    step = LocalOperation.shift(1).then(LocalOperation.flip(compensating))
    return LocalOperation.global_flip(gamma.n), step


@lru_cache(maxsize=64)
def twirl_group(gamma: GammaVector) -> TwirlSpec:
    """Close the two generators under composition."""
    gamma.require_odd()
    n = gamma.n
    index = np.arange(n * 4).reshape(n, 2, 2)
    generators = twirl_generators(gamma)

    identity = LocalOperation.identity()
    seen: dict[bytes, tuple[LocalOperation, np.ndarray]] = {index.tobytes(): (identity, index)}
    frontier = [(identity, index)]
    while frontier:
        next_frontier: list[tuple[LocalOperation, np.ndarray]] = []
        for op, acted in frontier:
            for gen in generators:
                image = _act(gen, acted)
                key = image.tobytes()
                if key not in seen:
                    composed = op.then(gen)
                    seen[key] = (composed, image)
                    next_frontier.append((composed, image))
        frontier = next_frontier

    elements = tuple(op for op, _ in seen.values())
    permutations = np.stack([image.ravel() for _, image in seen.values()])
    permutations.setflags(write=False)
    logger.debug("Twirl group for %s has %d elements", gamma.label, len(elements))
    return TwirlSpec(target=gamma, elements=elements, permutations=permutations)


def depolarize(box: Box, gamma: GammaVector, tol: float = DATA_TOL) -> Box:
    """Isotropic form ε·p_max^γ + (1 − ε)·p_w with the same C_n^γ value."""
    box.require_dichotomic()
    gamma.require_odd()
    if gamma.n != box.n:
        msg = f"Sign vector has length {gamma.n}, box has n={box.n}"
        raise InvalidBoxError(msg)
    box.require_nondisturbing(tol)
    return twirl_group(gamma).average(box)


def isotropic_weight(box: Box, gamma: GammaVector) -> float:
    """ε of the isotropic form, recovered as C_n^γ / n."""
    return c_value(box, gamma) / box.n


def align_to_canonical(box: Box, tol: float = VIOLATION_TOL) -> tuple[Box, LocalOperation]:
    """
    Output flips moving the violated C^γ onto the canonical (+,…,+,−).

    Boxes with no violated inequality come back unchanged with the identity.
    """
    box.require_dichotomic()
    gamma, value = most_violated(box)
    if value <= box.n - 2 + tol:
        return box, LocalOperation.identity()
    op = LocalOperation.flip(flip_set_between(gamma, GammaVector.canonical(box.n)))
    logger.debug("Aligning %s onto canonical with %s", gamma.label, op.render())
    return apply(op, box), op


# --- literal transcription of the shift-and-flip step ------------------------


def literal_step_two_terms(n: int) -> tuple[LocalOperation, ...]:
    """
    Term k: shift by k, then flip every observable whose 1-based label lies
    in {1, …, n−k+1}.
    """
    return tuple(
        LocalOperation.shift(k).then(LocalOperation.flip(j for j in range(n) if j + 1 <= n - k + 1))
        for k in range(n)
    )


def literal_step_two(box: Box) -> Box:
    """Uniform average over the literal shift-and-flip terms."""
    box.require_dichotomic()
    terms = literal_step_two_terms(box.n)
    stacked = np.stack([_act(op, box.edges) for op in terms])
    return Box(stacked.mean(axis=0), label=box.label)


@dataclass(frozen=True, slots=True)
class TwirlComparison:
    """How the literal shift-and-flip average compares with the group twirl."""

    gamma: GammaVector
    c_before: float
    c_group: float
    c_literal: float
    max_difference: float
    tol: float

    @property
    def literal_preserves_c(self) -> bool:
        return abs(self.c_literal - self.c_before) <= self.tol

    @property
    def agree(self) -> bool:
        return self.max_difference <= self.tol


def compare_twirl_readings(box: Box, gamma: GammaVector | None = None, tol: float = 1e-10) -> TwirlComparison:
    """Run both readings after the global-flip step and report their differences."""
    gamma = GammaVector.canonical(box.n) if gamma is None else gamma
    grouped = depolarize(box, gamma)
    flipped = apply(LocalOperation.global_flip(box.n), box)
    unbiased = Box((box.edges + flipped.edges) / 2.0, label=box.label)
    literal = literal_step_two(unbiased)
    comparison = TwirlComparison(
        gamma=gamma,
        c_before=c_value(box, gamma),
        c_group=c_value(grouped, gamma),
        c_literal=c_value(literal, gamma),
        max_difference=grouped.max_difference(literal),
        tol=tol,
    )
    if not comparison.agree:
        logger.info(
            "Literal shift-and-flip reading differs from the group twirl by %.3e (C %.6f -> %.6f)",
            comparison.max_difference,
            comparison.c_before,
            comparison.c_literal,
        )
    return comparison
