"""Membership of a box in the local/noncontextual polytope."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from ncycle_entropic.core.box import DATA_TOL
from ncycle_entropic.core.boxes import enumerate_assignments
from ncycle_entropic.core.decomposition import Decomposition
from ncycle_entropic.core.errors import InconclusiveSolveError, SizeGuardError
from ncycle_entropic.engine.inequalities import most_violated
from ncycle_entropic.engine.simplex import lp_feasibility

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from ncycle_entropic.core.box import Box
    from ncycle_entropic.core.gamma import GammaVector
    from ncycle_entropic.core.types import VerdictMethod

logger = logging.getLogger("ncycle_entropic").getChild("oracle")

MAX_DETERMINISTIC_POINTS = 2**20
LP_ONLY_NOTE = "LP-only verdict"


@dataclass(frozen=True, slots=True)
class MembershipVerdict:
    """
    Local or not, with exactly one certificate: a decomposition, the tightest
    C_n^γ facet with its excess over n − 2, or a Farkas vector.
    """

    is_local: bool
    method: VerdictMethod
    decomposition: Decomposition | None = None
    gamma: GammaVector | None = None
    excess: float | None = None
    farkas: tuple[float, ...] | None = None
    note: str | None = None

    def __post_init__(self) -> None:
        kinds = sum(x is not None for x in (self.decomposition, self.gamma, self.farkas))
        if kinds != 1:
            msg = f"A verdict carries exactly one certificate, got {kinds}"
            raise ValueError(msg)

    @property
    def label(self) -> str:
        return "local" if self.is_local else "nonlocal"


def facet_check(box: Box, tol: float = DATA_TOL) -> MembershipVerdict:
    """Local iff every C_n^γ ≤ n − 2 + tol; reports the most violated (or tightest) γ."""
    box.require_dichotomic()
    box.require_nondisturbing(tol)
    gamma, value = most_violated(box)
    excess = value - (box.n - 2)
    return MembershipVerdict(
        is_local=excess <= tol,
        method="facet-check",
        gamma=gamma,
        excess=excess,
    )


@lru_cache(maxsize=16)
def _assignment_matrix(n: int, d: int) -> tuple[tuple[tuple[int, ...], ...], npt.NDArray[np.float64]]:
    labels = tuple(enumerate_assignments(n, d))
    lam = np.array(labels, dtype=np.int64)
    per_edge = d * d - 1
    A = np.zeros((1 + n * per_edge, len(labels)))
    A[0] = 1.0
    for i in range(n):
        cell = lam[:, i] * d + lam[:, (i + 1) % n]
        for r in range(per_edge):
            A[1 + i * per_edge + r] = cell == r
    A.setflags(write=False)
    return labels, A


def local_constraints(box: Box) -> tuple[tuple[tuple[int, ...], ...], npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Linear system ρ ≥ 0, Σρ = 1, Σ_λ ρ(λ) p(x_i x_{i+1}|λ) = p(x_i x_{i+1}|X_i X_{i+1}).

    Only d² − 1 entries per edge are kept; the last one follows from normalization.
    """
    n, d = box.n, box.d
    if d**n > MAX_DETERMINISTIC_POINTS:
        msg = f"d^n = {d}^{n} deterministic points exceeds the guard of {MAX_DETERMINISTIC_POINTS}"
        raise SizeGuardError(msg)
    labels, A = _assignment_matrix(n, d)
    per_edge = d * d - 1
    b = np.concatenate([[1.0], box.edges.reshape(n, d * d)[:, :per_edge].ravel()])
    return labels, A, b


def local_support(labels: Sequence[tuple[int, ...]], weights: npt.NDArray[np.float64]) -> Decomposition:
    """
    Positive LP weights as a decomposition, rescaled to sum to one.

    The solve is accepted up to its residual tolerance, which is looser than
    the weight-sum check of `Decomposition`.
    """
    positive = np.flatnonzero(weights > 0.0)
    total = float(weights[positive].sum())
    return Decomposition({labels[j]: float(weights[j]) / total for j in positive})


def decompose_local(box: Box, tol: float = DATA_TOL) -> MembershipVerdict:
    """Convex decomposition over deterministic assignments, or a proof that none exists."""
    box.require_nondisturbing(tol)
    labels, A, b = local_constraints(box)
    result = lp_feasibility(A, b, residual_tol=10 * tol)
    note = LP_ONLY_NOTE if box.d > 2 else None

    if result.status == "inconclusive":
        msg = f"Simplex stopped after {result.iterations} pivots without a verdict (objective {result.objective:.3e})"
        raise InconclusiveSolveError(msg)

    if result.feasible and result.weights is not None:
        decomposition = local_support(labels, result.weights)
        logger.debug("Local decomposition with %d vertices", len(decomposition))
        return MembershipVerdict(
            is_local=True,
            method="lp-decomposition",
            decomposition=decomposition,
            note=note,
        )

    if box.d == 2:
        gamma, value = most_violated(box)
        return MembershipVerdict(
            is_local=False,
            method="lp-decomposition",
            gamma=gamma,
            excess=value - (box.n - 2),
        )
    farkas = result.farkas if result.farkas is not None else np.zeros(0)
    return MembershipVerdict(
        is_local=False,
        method="lp-decomposition",
        farkas=tuple(farkas.tolist()),
        note=note,
    )
