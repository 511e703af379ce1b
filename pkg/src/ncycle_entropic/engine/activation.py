"""
Entropic activation: mixing a nonlocal box with a classically correlated one
until some BC_n^k inequality is violated.

BC values of v·B + (1 − v)·p_C^γ′ are computed as exact entropy shifts away
from p_C^γ′, whose edge and marginal entropies are all exactly one bit and
whose BC values are all zero. The normalized value BC/v is therefore available
as a function of ln v, which keeps violations of order v·|ln v| visible long
after v itself has dropped below any fixed tolerance.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Literal

import numpy as np
from scipy.optimize import minimize_scalar

from ncycle_entropic.core.box import DATA_TOL, Box, mix
from ncycle_entropic.core.boxes import classical_box, vertex_box
from ncycle_entropic.core.decomposition import AppendixVertex, Decomposition
from ncycle_entropic.core.errors import InvalidBoxError, UnrepresentableCertificateError
from ncycle_entropic.core.gamma import GammaVector
from ncycle_entropic.engine.entropy import LN2, entropy_shift_asymptotics, entropy_shift_rate
from ncycle_entropic.engine.inequalities import VIOLATION_TOL, bc_coefficients, bc_value, c_value
from ncycle_entropic.engine.oracle import facet_check
from ncycle_entropic.engine.symmetry import LocalOperation, align_to_canonical, depolarize

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

logger = logging.getLogger("ncycle_entropic").getChild("activation")

SearchStage = Literal["grid", "refined", "deep-tail"]

# CHSH in the appendix labelling: violation means C_4 > 1.
APPENDIX_GAMMA = GammaVector.of(1, 1, -1, 1)
APPENDIX_K = 2

# A written certificate must reproduce the certified BC value to this relative precision.
CERTIFICATE_REL_TOL = 1e-3


# --- exact mixture evaluation -------------------------------------------------


@lru_cache(maxsize=64)
def _coefficient_matrix(n: int) -> npt.NDArray[np.float64]:
    """Row k holds the (edge, marginal) weights of BC_n^k."""
    rows = [np.concatenate(bc_coefficients(n, k)) for k in range(n)]
    matrix = np.stack(rows)
    matrix.setflags(write=False)
    return matrix


def _check_companion(box: Box, gamma_prime: GammaVector) -> None:
    gamma_prime.require_even()
    if gamma_prime.n != box.n:
        msg = f"Companion has length {gamma_prime.n}, box has n={box.n}"
        raise InvalidBoxError(msg)


def normalized_bc_profile(box: Box, gamma_prime: GammaVector, log_v: float) -> npt.NDArray[np.float64]:
    """BC_n^k / v of v·box + (1 − v)·p_C^γ′ for every k, in bits."""
    base = classical_box(gamma_prime)
    rates = [entropy_shift_rate(base.edges[i], box.edges[i], log_v) for i in range(box.n)]
    base_marg = base.marginals("left")
    box_marg = box.marginals("left")
    rates.extend(entropy_shift_rate(base_marg[j], box_marg[j], log_v) for j in range(box.n))
    return _coefficient_matrix(box.n) @ np.asarray(rates)


def normalized_bc_of_mixture(
    box: Box,
    gamma_prime: GammaVector,
    log_v: float,
    k: int,
    tol: float = DATA_TOL,
) -> float:
    """BC_n^k / v as a function of ln v; finite even where v underflows."""
    box.require_dichotomic()
    box.require_nondisturbing(tol)
    _check_companion(box, gamma_prime)
    if not 0 <= k < box.n:
        msg = f"Inequality index {k} out of range for n={box.n}"
        raise IndexError(msg)
    return float(normalized_bc_profile(box, gamma_prime, log_v)[k])


def bc_of_mixture(box: Box, gamma_prime: GammaVector, v: float, k: int, tol: float = DATA_TOL) -> float:
    """bc_value(mix([box, p_C^γ′], [v, 1 − v]), k) without cancellation for small v."""
    if not 0.0 <= v <= 1.0:
        msg = f"Mixing weight must lie in [0, 1], got {v}"
        raise ValueError(msg)
    if v == 0.0:
        box.require_nondisturbing(tol)
        _check_companion(box, gamma_prime)
        return 0.0
    return v * normalized_bc_of_mixture(box, gamma_prime, math.log(v), k, tol)


def mixture_asymptotics(box: Box, gamma_prime: GammaVector, k: int, tol: float = DATA_TOL) -> tuple[float, float]:
    """
    (a, c) in bits with BC_n^k / v ≈ a·(−ln v) + c as v → 0.

    `a` is positive exactly when the box pushes mass onto outcome pairs the
    classical companion never produces, weighted by the BC coefficients.
    """
    box.require_dichotomic()
    box.require_nondisturbing(tol)
    _check_companion(box, gamma_prime)
    slopes, consts = _asymptotic_profile(box, gamma_prime)
    return float(slopes[k]), float(consts[k])


def _asymptotic_profile(
    box: Box,
    gamma_prime: GammaVector,
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    base = classical_box(gamma_prime)
    pairs = [entropy_shift_asymptotics(base.edges[i], box.edges[i]) for i in range(box.n)]
    base_marg = base.marginals("left")
    box_marg = box.marginals("left")
    pairs.extend(entropy_shift_asymptotics(base_marg[j], box_marg[j]) for j in range(box.n))
    terms = np.asarray(pairs)
    matrix = _coefficient_matrix(box.n)
    return matrix @ terms[:, 0], matrix @ terms[:, 1]


# --- closed-form expansion for the isotropic box ------------------------------


@dataclass(frozen=True, slots=True)
class ExpansionModel:
    """
    Small-v expansion of BC_n for ε·p_max + (1 − ε)·p_w mixed with p_C:
    BC_n ≈ (v / ln 4)·[f(n, ε) − (2 − n(1 − ε))·ln v].
    """

    n: int
    epsilon: float
    f_value: float
    coefficient: float

    @classmethod
    def build(cls, n: int, epsilon: float) -> ExpansionModel:
        if not 0.0 < epsilon < 1.0:
            msg = f"The expansion needs 0 < ε < 1 (ln(1 − ε) is singular), got {epsilon}"
            raise ValueError(msg)
        eps = epsilon
        f = (
            2.0
            - n * (1.0 - eps) * (1.0 + LN2)
            + (n + eps - n * eps) * math.log(1.0 - eps)
            - eps * math.log(1.0 + eps)
            + math.log(4.0 / (1.0 - eps * eps))
        )
        return cls(n=n, epsilon=eps, f_value=f, coefficient=2.0 - n * (1.0 - eps))

    @property
    def threshold(self) -> float:
        return (self.n - 2) / self.n

    @property
    def predicts_violation(self) -> bool:
        return self.coefficient > 0.0

    def evaluate(self, v: float) -> float:
        if not 0.0 < v < 1.0:
            msg = f"The expansion needs 0 < v < 1, got {v}"
            raise ValueError(msg)
        return v / math.log(4.0) * (self.f_value - self.coefficient * math.log(v))


def expansion_eq9(n: int, epsilon: float, v: float) -> float:
    """Closed-form small-v BC_n of the isotropic mixture, in bits."""
    return ExpansionModel.build(n, epsilon).evaluate(v)


# --- search ------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ActivationGrid:
    v_max: float = 0.5
    v_min: float = 1e-8
    points: int = 64
    refine: bool = True
    deep_tail: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.v_min < self.v_max <= 1.0:
            msg = f"Grid needs 0 < v_min < v_max <= 1, got [{self.v_min}, {self.v_max}]"
            raise ValueError(msg)
        if self.points < 2:
            msg = f"Grid needs at least 2 points, got {self.points}"
            raise ValueError(msg)

    def log_weights(self) -> npt.NDArray[np.float64]:
        """ln v from v_max down to v_min, evenly spaced."""
        return np.linspace(math.log(self.v_max), math.log(self.v_min), self.points)


@dataclass(frozen=True, slots=True)
class ActivationResult:
    """
    Outcome of an activation search.

    When `found`, the mixture v·box + (1 − v)·p_C^companion at v = exp(log_v_star) violates
    BC^{k_star} with BC / v = `normalized_violation` > tol; `v_star` is
    exp(log_v_star) and may underflow to 0.0 for very shallow violations.
    `certificate_representable` is set only when that mixture, built and
    evaluated in double precision, still reproduces `bc_at_v`.
    """

    found: bool
    companion: GammaVector
    used_depolarization: bool
    operation: LocalOperation
    box: Box
    excess: float
    v_star: float | None = None
    log_v_star: float | None = None
    k_star: int | None = None
    bc_at_v: float | None = None
    normalized_violation: float | None = None
    stage: SearchStage | None = None
    diagnostic: str | None = None
    certificate_representable: bool = False

    @property
    def locally_explained(self) -> bool:
        return not self.found and self.diagnostic == "local"

    def certificate_mixture(self) -> Box:
        """The violating mixture itself, when it survives being written as a box."""
        if not self.found or self.v_star is None:
            msg = "Nothing was certified"
            raise ValueError(msg)
        if not self.certificate_representable:
            msg = f"Violation at ln v = {self.log_v_star:.4g} is below double precision; no certificate box can reproduce it"
            raise UnrepresentableCertificateError(msg)
        return _mixture(self.box, self.companion, self.v_star)

    def describe_mixture(self) -> str | None:
        """`v·box + (1 − v)·companion` as text, or None when nothing was certified."""
        if not self.found or self.log_v_star is None:
            return None
        weight = f"{self.v_star:.6g}" if self.v_star else f"exp({self.log_v_star:.6g})"
        return f"{weight}·{self.box.label or 'box'} + (1 − v)·classical{self.companion.label}"

    def reevaluate(self) -> float:
        """Recompute BC^{k_star} / v at the certified weight."""
        if not self.found or self.log_v_star is None or self.k_star is None:
            msg = "Nothing was certified"
            raise ValueError(msg)
        return normalized_bc_of_mixture(self.box, self.companion, self.log_v_star, self.k_star)


def _pick_k(profile: npt.NDArray[np.float64], tol: float) -> int | None:
    n = profile.size
    if profile[n - 1] > tol:
        return n - 1
    best = int(np.argmax(profile))
    return best if profile[best] > tol else None


def _refine(
    working: Box,
    companion: GammaVector,
    log_vs: npt.NDArray[np.float64],
    index: int,
    k: int,
) -> tuple[float, float] | None:
    """Golden-section maximisation of BC^k between the neighbours of grid point `index`."""
    if index == 0 or index == log_vs.size - 1:
        return None

    def neg_bc(log_v: float) -> float:
        return -math.exp(log_v) * float(normalized_bc_profile(working, companion, log_v)[k])

    lo, mid, hi = float(log_vs[index + 1]), float(log_vs[index]), float(log_vs[index - 1])
    f_lo, f_mid, f_hi = neg_bc(lo), neg_bc(mid), neg_bc(hi)
    if not (f_mid < f_lo and f_mid < f_hi):
        return None
    result = minimize_scalar(neg_bc, bracket=(lo, mid, hi), method="golden")
    best = float(result.x)
    if not lo <= best <= hi or float(result.fun) > f_mid:
        return None
    return best, float(normalized_bc_profile(working, companion, best)[k])


def _mixture(box: Box, companion: GammaVector, v: float) -> Box:
    return mix([box, classical_box(companion)], [v, 1.0 - v], label="activated")


def certificate_reproduces(box: Box, companion: GammaVector, v: float, k: int, bc_at_v: float) -> bool:
    """Whether the mixture at `v`, evaluated directly, keeps a positive BC^k within CERTIFICATE_REL_TOL of `bc_at_v`."""
    if not v > 0.0 or not bc_at_v > 0.0:
        return False
    direct = bc_value(_mixture(box, companion, v), k)
    return direct > 0.0 and abs(direct - bc_at_v) <= CERTIFICATE_REL_TOL * bc_at_v


def _found(
    base: ActivationResult,
    log_v: float,
    k: int,
    normalized: float,
    stage: SearchStage,
) -> ActivationResult:
    v = math.exp(log_v)
    bc = v * normalized
    representable = certificate_reproduces(base.box, base.companion, v, k, bc)
    logger.debug("BC^%d violated at ln v=%.4f (BC/v=%.3e, %s)", k + 1, log_v, normalized, stage)
    return ActivationResult(
        found=True,
        companion=base.companion,
        used_depolarization=base.used_depolarization,
        operation=base.operation,
        box=base.box,
        excess=base.excess,
        v_star=v,
        log_v_star=log_v,
        k_star=k,
        bc_at_v=bc,
        normalized_violation=normalized,
        stage=stage,
        diagnostic=None if representable else "certificate not representable in double precision; see log_v_star",
        certificate_representable=representable,
    )


def activation_search(
    box: Box,
    tol: float = VIOLATION_TOL,
    grid: ActivationGrid | None = None,
    *,
    depolarize_first: bool = True,
    disturbance_tol: float = DATA_TOL,
) -> ActivationResult:
    """
    Facet check, alignment onto the canonical γ, optional twirl, then a scan
    of v·B + (1 − v)·p_C^γ′ from v_max down to v_min.

    If the grid shows no violation, the deep tail is certified directly:
    every k whose coefficient of −ln v is positive yields BC/v > tol once ln v
    passes twice the crossing of its asymptotic form.
    """
    grid = ActivationGrid() if grid is None else grid
    box.require_dichotomic()
    box.require_nondisturbing(disturbance_tol)

    verdict = facet_check(box, tol)
    excess = verdict.excess if verdict.excess is not None else 0.0
    canonical = GammaVector.canonical(box.n)
    companion = canonical.companion()
    if verdict.is_local:
        return ActivationResult(
            found=False,
            companion=companion,
            used_depolarization=False,
            operation=LocalOperation.identity(),
            box=box,
            excess=excess,
            diagnostic="local",
        )

    aligned, op = align_to_canonical(box, tol)
    working = depolarize(aligned, canonical, disturbance_tol) if depolarize_first else aligned
    base = ActivationResult(
        found=False,
        companion=companion,
        used_depolarization=depolarize_first,
        operation=op,
        box=working,
        excess=excess,
    )

    log_vs = grid.log_weights()
    for index, log_v in enumerate(log_vs):
        profile = normalized_bc_profile(working, companion, float(log_v))
        k = _pick_k(profile, tol)
        if k is None:
            continue
        if grid.refine:
            refined = _refine(working, companion, log_vs, index, k)
            if refined is not None and refined[1] > tol:
                return _found(base, refined[0], k, refined[1], "refined")
        return _found(base, float(log_v), k, float(profile[k]), "grid")

    if grid.deep_tail:
        slopes, consts = _asymptotic_profile(working, companion)
        for k in np.argsort(-slopes):
            slope = float(slopes[k])
            if slope <= tol / 2:
                break
            crossing = (float(consts[k]) - tol) / slope
            log_v = min(math.log(grid.v_min), 2.0 * crossing)
            for _ in range(4):
                value = float(normalized_bc_profile(working, companion, log_v)[k])
                if value > tol:
                    return _found(base, log_v, int(k), value, "deep-tail")
                log_v *= 2.0

    logger.warning(
        "Nonlocal box (C excess %.3e) shows no BC violation down to v=%.1e",
        excess,
        grid.v_min,
    )
    return ActivationResult(
        found=False,
        companion=companion,
        used_depolarization=depolarize_first,
        operation=op,
        box=working,
        excess=excess,
        diagnostic="nonlocal box not activated; counterexample candidate",
    )


def entropic_twin(gamma: GammaVector, k: int | None = None) -> Box:
    """Local box with exactly the BC profile of p_max^γ: its companion p_C^γ′."""
    return classical_box(gamma.companion(k))


# --- CHSH in the appendix labelling -------------------------------------------


def _appendix_sign(alpha: int, beta: int, gamma: int, delta: int) -> int:
    exponent = (1 - alpha) * (beta + delta) + alpha * (beta + gamma + delta)
    return -1 if exponent % 2 else 1


def c4_from_weights(decomposition: Decomposition) -> float:
    """CHSH value (local bound 1) read off the weights of the 16 + 8 CHSH vertices."""
    total = 0.0
    for label, weight in decomposition.items():
        if not isinstance(label, AppendixVertex):
            msg = f"CHSH weight formula needs appendix vertex labels, got {label!r}"
            raise InvalidBoxError(msg)
        if label.kind == "det":
            a, b, c, d = label.bits
            total += _appendix_sign(a, b, c, d) * weight
        elif label.bits == (0, 0, 0):
            total += 2.0 * weight
        elif label.bits == (0, 0, 1):
            total -= 2.0 * weight
    return total


def appendix_chsh(box: Box) -> float:
    """CHSH value of a 4-cycle box with local bound 1."""
    return c_value(box, APPENDIX_GAMMA) / 2.0


@dataclass(frozen=True, slots=True)
class ExpansionFit:
    """Straight-line fit of BC_4·ln4 / v against ln v."""

    g: float
    slope: float
    predicted_slope: float
    c4: float
    max_residual: float


def appendix_expansion_fit(box: Box, log_vs: Sequence[float] | None = None) -> ExpansionFit:
    """
    Fit BC_4·ln4 / v = g + s·ln v on small weights of the raw (untwirled)
    mixture with the all-plus classical box; s should approach 2(1 − C_4).
    """
    if box.n != 4:
        msg = f"The CHSH expansion is defined for n=4, got n={box.n}"
        raise InvalidBoxError(msg)
    box.require_dichotomic()
    box.require_nondisturbing()
    xs = np.asarray(log_vs if log_vs is not None else np.log(np.logspace(-6, -12, 13)), dtype=np.float64)
    companion = APPENDIX_GAMMA.companion(APPENDIX_K)
    ys = np.array([2.0 * LN2 * normalized_bc_profile(box, companion, float(x))[APPENDIX_K] for x in xs])
    slope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.abs(ys - (slope * xs + intercept)).max())
    c4 = appendix_chsh(box)
    return ExpansionFit(
        g=float(intercept),
        slope=float(slope),
        predicted_slope=2.0 * (1.0 - c4),
        c4=c4,
        max_residual=residual,
    )


def appendix_mixture(decomposition: Decomposition) -> Box:
    """Assemble a 4-cycle box from weights on the CHSH vertices."""
    boxes: list[Box] = []
    for label, _ in decomposition.items():
        if not isinstance(label, AppendixVertex):
            msg = f"Expected appendix vertex labels, got {label!r}"
            raise InvalidBoxError(msg)
        boxes.append(vertex_box(label, 4))
    return mix(boxes, decomposition.normalized_weights(), label="appendix-mixture")
