"""The linear C_n^γ family and the entropic Braunstein–Caves family."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from ncycle_entropic.core.box import DATA_TOL
from ncycle_entropic.core.gamma import GammaVector, enumerate_gammas
from ncycle_entropic.engine.entropy import edge_entropies, marginal_entropies

if TYPE_CHECKING:
    import numpy.typing as npt

    from ncycle_entropic.core.box import Box
    from ncycle_entropic.core.types import InequalityFamily

VIOLATION_TOL = 1e-9


def expectation(box: Box, i: int) -> float:
    """⟨X_i X_{i+1}⟩ = p(00) + p(11) − p(01) − p(10) on edge i."""
    box.require_dichotomic()
    if not 0 <= i < box.n:
        msg = f"Edge index {i} out of range for n={box.n}"
        raise IndexError(msg)
    e = box.edges[i]
    return float(e[0, 0] + e[1, 1] - e[0, 1] - e[1, 0])


def correlators(box: Box) -> npt.NDArray[np.float64]:
    box.require_dichotomic()
    e = box.edges
    return e[:, 0, 0] + e[:, 1, 1] - e[:, 0, 1] - e[:, 1, 0]


@lru_cache(maxsize=32)
def odd_gammas(n: int) -> tuple[GammaVector, ...]:
    return tuple(enumerate_gammas(n, odd=True))


@lru_cache(maxsize=32)
def _gamma_matrix(n: int) -> npt.NDArray[np.float64]:
    m = np.array([g.signs for g in odd_gammas(n)], dtype=np.float64)
    m.setflags(write=False)
    return m


def _check_gamma(box: Box, gamma: GammaVector) -> None:
    gamma.require_odd()
    if gamma.n != box.n:
        msg = f"Sign vector has length {gamma.n}, box has n={box.n}"
        raise ValueError(msg)


def c_value(box: Box, gamma: GammaVector) -> float:
    """C_n^γ = Σ_i γ_i ⟨X_i X_{i+1}⟩; local boxes stay at or below n − 2."""
    _check_gamma(box, gamma)
    return float(np.dot(np.asarray(gamma.signs, dtype=np.float64), correlators(box)))


def all_c_values(box: Box) -> npt.NDArray[np.float64]:
    """C values for every odd γ, in `odd_gammas(n)` order."""
    return _gamma_matrix(box.n) @ correlators(box)


def most_violated(box: Box) -> tuple[GammaVector, float]:
    """The sign vector with the largest C value and that value."""
    values = all_c_values(box)
    best = int(np.argmax(values))
    return odd_gammas(box.n)[best], float(values[best])


@lru_cache(maxsize=256)
def bc_coefficients(n: int, k: int) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """
    Weights of (edge entropies, marginal entropies) in BC_n^k.

    BC^k = H(X_k X_{k+1}) + Σ_{j∉{k,k+1}} H(X_j) − Σ_{j≠k} H(X_j X_{j+1}).
    """
    if not 0 <= k < n:
        msg = f"Inequality index {k} out of range for n={n}"
        raise IndexError(msg)
    edge = -np.ones(n)
    edge[k] = 1.0
    marg = np.ones(n)
    marg[k] = 0.0
    marg[(k + 1) % n] = 0.0
    edge.setflags(write=False)
    marg.setflags(write=False)
    return edge, marg


def bc_values(box: Box, tol: float = DATA_TOL) -> npt.NDArray[np.float64]:
    """BC_n^k for k = 0..n−1; marginals are taken from the left edge after a disturbance check."""
    box.require_nondisturbing(tol)
    h_edges = edge_entropies(box)
    h_marg = marginal_entropies(box, "left")
    out = np.empty(box.n)
    for k in range(box.n):
        edge_w, marg_w = bc_coefficients(box.n, k)
        out[k] = edge_w @ h_edges + marg_w @ h_marg
    return out


def bc_value(box: Box, k: int, tol: float = DATA_TOL) -> float:
    if not 0 <= k < box.n:
        msg = f"Inequality index {k} out of range for n={box.n}"
        raise IndexError(msg)
    return float(bc_values(box, tol)[k])


@dataclass(frozen=True, slots=True)
class ReportRow:
    family: InequalityFamily
    label: str
    value: float
    bound: float
    violated: bool


@dataclass(frozen=True, slots=True)
class InequalityReport:
    n: int
    c_values: dict[GammaVector, float]
    bc_values: tuple[float, ...]
    tol: float
    c_bound: float
    bc_bound: float = 0.0

    @property
    def violated_c(self) -> tuple[GammaVector, ...]:
        return tuple(g for g, v in self.c_values.items() if v > self.c_bound + self.tol)

    @property
    def violated_bc(self) -> tuple[int, ...]:
        return tuple(k for k, v in enumerate(self.bc_values) if v > self.bc_bound + self.tol)

    @property
    def max_c(self) -> float | None:
        return max(self.c_values.values()) if self.c_values else None

    def rows(self) -> list[ReportRow]:
        rows = [
            ReportRow("C", f"C^{g.label}", v, self.c_bound, v > self.c_bound + self.tol)
            for g, v in self.c_values.items()
        ]
        rows.extend(
            ReportRow("BC", f"BC^{k + 1}", v, self.bc_bound, v > self.bc_bound + self.tol)
            for k, v in enumerate(self.bc_values)
        )
        return rows


def full_report(box: Box, tol: float = VIOLATION_TOL, disturbance_tol: float = DATA_TOL) -> InequalityReport:
    """Every C_n^γ (dichotomic boxes only) and every BC_n^k, flagged against their bounds."""
    bcs = bc_values(box, disturbance_tol)
    c_map: dict[GammaVector, float] = {}
    if box.d == 2:
        values = all_c_values(box)
        c_map = dict(zip(odd_gammas(box.n), values.tolist(), strict=True))
    return InequalityReport(
        n=box.n,
        c_values=c_map,
        bc_values=tuple(bcs.tolist()),
        tol=tol,
        c_bound=float(box.n - 2),
    )
