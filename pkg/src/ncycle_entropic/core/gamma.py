"""Sign vectors labelling the C_n inequalities and the PR/classical vertex families."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import TYPE_CHECKING

from ncycle_entropic.core.errors import ParityError

if TYPE_CHECKING:
    from collections.abc import Iterator


@dataclass(frozen=True, slots=True)
class GammaVector:
    """
    Sign vector γ ∈ {−1, +1}^n.

    Entry i is the sign attached to edge i, the edge joining X_i and X_{i+1}
    (indices are 0-based and cyclic, so edge n−1 joins X_{n−1} and X_0).
    """

    signs: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.signs) < 3:
            msg = f"Sign vector needs at least 3 entries, got {len(self.signs)}"
            raise ValueError(msg)
        if any(s not in (-1, 1) for s in self.signs):
            msg = f"Sign vector entries must be -1 or +1, got {self.signs}"
            raise ValueError(msg)

    @classmethod
    def of(cls, *signs: int) -> GammaVector:
        return cls(tuple(signs))

    @classmethod
    def canonical(cls, n: int) -> GammaVector:
        """γ_i = +1 for every edge but the last, which carries −1."""
        return cls((1,) * (n - 1) + (-1,))

    @classmethod
    def all_plus(cls, n: int) -> GammaVector:
        return cls((1,) * n)

    @property
    def n(self) -> int:
        return len(self.signs)

    @property
    def minus_count(self) -> int:
        return sum(1 for s in self.signs if s == -1)

    @property
    def parity(self) -> int:
        return self.minus_count % 2

    @property
    def is_odd(self) -> bool:
        return self.parity == 1

    @property
    def minus_positions(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.signs) if s == -1)

    @property
    def label(self) -> str:
        return "(" + ",".join("+" if s == 1 else "-" for s in self.signs) + ")"

    def require_odd(self) -> GammaVector:
        if not self.is_odd:
            msg = f"Sign vector {self.label} has even parity; an odd number of -1 entries is required"
            raise ParityError(msg)
        return self

    def require_even(self) -> GammaVector:
        if self.is_odd:
            msg = f"Sign vector {self.label} has odd parity; an even number of -1 entries is required"
            raise ParityError(msg)
        return self

    def flipped(self, k: int) -> GammaVector:
        """Copy with the sign of edge k reversed."""
        if not 0 <= k < self.n:
            msg = f"Edge index {k} out of range for n={self.n}"
            raise IndexError(msg)
        signs = list(self.signs)
        signs[k] = -signs[k]
        return GammaVector(tuple(signs))

    def companion(self, k: int | None = None) -> GammaVector:
        """
        Even-parity companion γ′ with γ′_k = −γ_k.

        Without an explicit k the last −1 entry is flipped, which for the
        canonical vector is edge n−1 and yields the all-plus vector.
        """
        self.require_odd()
        if k is None:
            k = self.minus_positions[-1]
        return self.flipped(k)

    def shifted(self, offset: int) -> GammaVector:
        """Signs seen after relabelling X_i → X_{i+offset}."""
        n = self.n
        return GammaVector(tuple(self.signs[(i + offset) % n] for i in range(n)))


def enumerate_gammas(n: int, *, odd: bool = True) -> Iterator[GammaVector]:
    """All sign vectors of one parity, lexicographic with −1 before +1."""
    wanted = 1 if odd else 0
    for signs in itertools.product((-1, 1), repeat=n):
        if sum(1 for s in signs if s == -1) % 2 == wanted:
            yield GammaVector(signs)


def flip_set_between(source: GammaVector, target: GammaVector) -> frozenset[int]:
    """
    Observables whose outputs must be flipped to turn edge signs `source` into `target`.

    Flipping X_j reverses the sign on edges j−1 and j, so the sign changes
    must form an even set on the cycle; the returned set never contains X_0.
    """
    if source.n != target.n:
        msg = f"Sign vectors have different lengths ({source.n} vs {target.n})"
        raise ValueError(msg)
    if source.parity != target.parity:
        msg = f"{source.label} and {target.label} differ in parity; no output relabelling maps one to the other"
        raise ParityError(msg)

    flips: list[int] = []
    flipped = False
    # Walk the cycle: X_{i+1} is flipped iff the flip state changes across edge i.
    for i in range(source.n - 1):
        if source.signs[i] != target.signs[i]:
            flipped = not flipped
        if flipped:
            flips.append(i + 1)
    return frozenset(flips)
