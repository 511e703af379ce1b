"""Shannon entropies in bits, including a cancellation-free form for small mixing weights."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import entr

from ncycle_entropic.core.errors import InvalidBoxError

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy.typing as npt

    from ncycle_entropic.core.box import Box
    from ncycle_entropic.core.types import EdgeSide

LN2 = math.log(2.0)
DISTRIBUTION_TOL = 1e-9

# Below this weight the mixture entropies are expanded around the base point.
_DIRECT_WEIGHT_FLOOR = 1e-3


def shannon_entropy(dist: Sequence[float] | npt.NDArray[np.float64], tol: float = DISTRIBUTION_TOL) -> float:
    """−Σ p log₂ p with 0·log₂0 = 0."""
    p = np.asarray(dist, dtype=np.float64).ravel()
    if p.size == 0:
        msg = "Entropy of an empty distribution is undefined"
        raise InvalidBoxError(msg)
    if np.any(p < 0.0):
        msg = f"Distribution has negative entry {float(p.min())!r}"
        raise InvalidBoxError(msg)
    if abs(float(p.sum()) - 1.0) > tol:
        msg = f"Distribution sums to {float(p.sum())!r}, not 1"
        raise InvalidBoxError(msg)
    return float(entr(p).sum()) / LN2


def edge_entropies(box: Box) -> npt.NDArray[np.float64]:
    """H(X_i X_{i+1}) for every edge."""
    return entr(box.edges).sum(axis=(1, 2)) / LN2


def marginal_entropies(box: Box, side: EdgeSide = "left") -> npt.NDArray[np.float64]:
    """H(X_i) for every observable, marginals read from one side."""
    return entr(box.marginals(side)).sum(axis=1) / LN2


def _log1p_ratio(x: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """log(1 + x) / x, continuous through x = 0."""
    out = np.ones_like(x)
    small = np.abs(x) < 1e-8
    out[small] = 1.0 - x[small] / 2.0 + x[small] ** 2 / 3.0
    big = ~small
    out[big] = np.log1p(x[big]) / x[big]
    return out


def entropy_shift_rate(
    base: npt.NDArray[np.float64],
    target: npt.NDArray[np.float64],
    log_v: float,
) -> float:
    """
    [H((1−v)·base + v·target) − H(base)] / v in bits, with v = exp(log_v).

    For small v the difference is expanded entry by entry so that no two
    quantities of order one are subtracted: entries absent from `base`
    contribute −δ log₂(vδ), present ones −δ·log1p(x)/x − δ log₂(b + vδ) with
    δ = target − base and x = vδ/b. The result stays exact when v underflows,
    where it reduces to the leading asymptotic form.
    """
    b = np.asarray(base, dtype=np.float64).ravel()
    q = np.asarray(target, dtype=np.float64).ravel()
    if log_v > 0.0:
        msg = f"Mixing weight must not exceed 1, got log v = {log_v}"
        raise ValueError(msg)
    v = math.exp(log_v)
    delta = q - b

    if v >= _DIRECT_WEIGHT_FLOOR:
        mixed = b + v * delta
        return float(entr(mixed).sum() - entr(b).sum()) / (v * LN2)

    absent = b == 0.0
    d_abs = delta[absent]
    d_abs = d_abs[d_abs > 0.0]
    rate = float(np.sum(-d_abs * (log_v + np.log(d_abs))))

    b_pres = b[~absent]
    d_pres = delta[~absent]
    x = v * d_pres / b_pres
    rate += float(np.sum(-d_pres * _log1p_ratio(x) - d_pres * np.log(b_pres + v * d_pres)))
    return rate / LN2


def entropy_shift_asymptotics(
    base: npt.NDArray[np.float64],
    target: npt.NDArray[np.float64],
) -> tuple[float, float]:
    """
    Leading behaviour of `entropy_shift_rate` as v → 0, in bits.

    Returns (a, c) with rate ≈ a·(−ln v) + c: `a` collects the mass the
    target puts on entries absent from the base.
    """
    b = np.asarray(base, dtype=np.float64).ravel()
    q = np.asarray(target, dtype=np.float64).ravel()
    delta = q - b
    absent = b == 0.0
    d_abs = delta[absent]
    d_abs = d_abs[d_abs > 0.0]
    slope = float(d_abs.sum())
    const = float(np.sum(-d_abs * np.log(d_abs)))
    b_pres = b[~absent]
    d_pres = delta[~absent]
    const += float(np.sum(-d_pres - d_pres * np.log(b_pres)))
    return slope / LN2, const / LN2
