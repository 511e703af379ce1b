"""Dense phase-1 simplex for feasibility of {A w = b, w ≥ 0}."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    import numpy.typing as npt

    from ncycle_entropic.core.types import SolveStatus

logger = logging.getLogger("ncycle_entropic").getChild("simplex")

PIVOT_TOL = 1e-10
PHASE_ONE_TOL = 1e-8


@dataclass(frozen=True, slots=True)
class FeasibilityResult:
    """
    Outcome of a phase-1 solve.

    `weights` is a basic feasible solution when status is "feasible";
    `farkas` is a vector y with Aᵀy ≤ 0 and bᵀy > 0 when it is "infeasible".
    """

    status: SolveStatus
    iterations: int
    objective: float
    weights: npt.NDArray[np.float64] | None = None
    farkas: npt.NDArray[np.float64] | None = None
    residual: float | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def lp_feasibility(
    A: npt.ArrayLike,
    b: npt.ArrayLike,
    *,
    residual_tol: float = PHASE_ONE_TOL,
    pivot_tol: float = PIVOT_TOL,
    max_iterations: int | None = None,
) -> FeasibilityResult:
    """
    Minimize the sum of artificial variables from the all-artificial basis.

    Bland's rule picks the lowest-index improving column and breaks ratio
    ties by the lowest basic index, so degenerate systems cannot cycle. The
    basis is refactorized every iteration; a singular basis or the iteration
    cap yields "inconclusive", never a verdict.
    """
    A_orig = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b_orig = np.asarray(b, dtype=np.float64).ravel()
    m, n = A_orig.shape
    if b_orig.shape != (m,):
        msg = f"Right-hand side has {b_orig.size} entries for {m} rows"
        raise ValueError(msg)

    sign = np.where(b_orig < 0.0, -1.0, 1.0)
    A_eq = A_orig * sign[:, None]
    rhs = b_orig * sign

    tableau = np.hstack([A_eq, np.eye(m)])
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = list(range(n, n + m))
    cap = max_iterations if max_iterations is not None else 50 * (m + n)

    x_B = rhs.copy()
    y = np.ones(m)
    iterations = 0
    while True:
        B = tableau[:, basis]
        try:
            x_B = np.linalg.solve(B, rhs)
            y = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError:
            logger.warning("Singular basis after %d pivots", iterations)
            return FeasibilityResult("inconclusive", iterations, float("nan"))

        reduced = cost - tableau.T @ y
        reduced[basis] = 0.0
        improving = np.flatnonzero(reduced < -pivot_tol)
        if improving.size == 0:
            break
        if iterations >= cap:
            logger.warning("Iteration cap %d reached without optimality", cap)
            return FeasibilityResult("inconclusive", iterations, float(cost[basis] @ x_B))

        entering = int(improving[0])
        direction = np.linalg.solve(B, tableau[:, entering])
        rows = np.flatnonzero(direction > pivot_tol)
        if rows.size == 0:
            # Phase 1 is bounded below by zero; an unbounded ray means numerical trouble.
            return FeasibilityResult("inconclusive", iterations, float(cost[basis] @ x_B))
        ratios = np.clip(x_B[rows], 0.0, None) / direction[rows]
        best = float(ratios.min())
        ties = rows[ratios <= best + pivot_tol * max(1.0, abs(best))]
        leaving = min(ties.tolist(), key=lambda r: basis[r])
        basis[leaving] = entering
        iterations += 1

    objective = float(cost[basis] @ x_B)
    if objective >= PHASE_ONE_TOL:
        return FeasibilityResult(
            "infeasible",
            iterations,
            objective,
            farkas=y * sign,
        )

    weights = np.zeros(n)
    for row, var in enumerate(basis):
        if var < n:
            weights[var] = max(float(x_B[row]), 0.0)
    residual = float(np.abs(A_orig @ weights - b_orig).max()) if m else 0.0
    if residual > residual_tol:
        logger.warning("Phase-1 optimum %.2e but residual %.2e exceeds %.1e", objective, residual, residual_tol)
        return FeasibilityResult("inconclusive", iterations, objective, residual=residual)
    return FeasibilityResult("feasible", iterations, objective, weights=weights, residual=residual)
