"""Canonical boxes: deterministic points, nonsignalling vertices, classical and noisy boxes."""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from ncycle_entropic.core.box import Box, mix
from ncycle_entropic.core.decomposition import AppendixVertex, Decomposition
from ncycle_entropic.core.errors import InvalidBoxError, ParityError
from ncycle_entropic.core.gamma import GammaVector, enumerate_gammas

NONLOCAL_MIN_EXCESS = 1e-3

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from ncycle_entropic.core.decomposition import VertexLabel


def deterministic_box(n: int, assignment: Sequence[int], d: int = 2) -> Box:
    """Point mass at (λ_i, λ_{i+1}) on every edge."""
    lam = tuple(int(x) for x in assignment)
    if len(lam) != n:
        msg = f"Assignment has length {len(lam)}, expected n={n}"
        raise InvalidBoxError(msg)
    if any(not 0 <= x < d for x in lam):
        msg = f"Assignment {lam} has outcomes outside 0..{d - 1}"
        raise InvalidBoxError(msg)
    edges = np.zeros((n, d, d))
    for i in range(n):
        edges[i, lam[i], lam[(i + 1) % n]] = 1.0
    return Box(edges, label="det" + "".join(map(str, lam)))


def enumerate_assignments(n: int, d: int = 2) -> Iterator[tuple[int, ...]]:
    yield from itertools.product(range(d), repeat=n)


def _parity_box(gamma: GammaVector) -> np.ndarray:
    # Edge i is uniform on {x_i ⊕ x_{i+1} = δ_{−1,γ_i}}.
    edges = np.zeros((gamma.n, 2, 2))
    for i, s in enumerate(gamma.signs):
        target = 1 if s == -1 else 0
        for a in (0, 1):
            edges[i, a, a ^ target] = 0.5
    return edges


def pr_box(gamma: GammaVector) -> Box:
    """Nonsignalling vertex p_max^γ; needs an odd number of −1 signs."""
    gamma.require_odd()
    return Box(_parity_box(gamma), label=f"pr{gamma.label}")


def classical_box(gamma_prime: GammaVector) -> Box:
    """Local box p_C^γ′ reproducible with one shared random bit; needs even parity."""
    gamma_prime.require_even()
    return Box(_parity_box(gamma_prime), label=f"classical{gamma_prime.label}")


def white_noise(n: int, d: int = 2) -> Box:
    return Box(np.full((n, d, d), 1.0 / (d * d)), label="white")


def isotropic_box(n: int, epsilon: float, gamma: GammaVector | None = None) -> Box:
    """p_I = ε p_max^γ + (1 − ε) p_w."""
    if not 0.0 <= epsilon <= 1.0:
        msg = f"Isotropic weight ε must lie in [0, 1], got {epsilon}"
        raise ValueError(msg)
    gamma = GammaVector.canonical(n) if gamma is None else gamma
    if gamma.n != n:
        msg = f"Sign vector has length {gamma.n}, expected n={n}"
        raise ValueError(msg)
    return mix([pr_box(gamma), white_noise(n)], [epsilon, 1.0 - epsilon], label=f"iso(ε={epsilon:g})")


def emax_box(gamma: GammaVector, k: int | None = None) -> Box:
    """½(p_max^γ + p_C^γ′) with γ′ flipped at edge k, which must carry γ_k = −1."""
    gamma.require_odd()
    k = gamma.minus_positions[-1] if k is None else k
    if gamma.signs[k] != -1:
        msg = f"Edge {k + 1} of {gamma.label} carries +1; the maximal BC violation needs γ_k = -1"
        raise ParityError(msg)
    return mix([pr_box(gamma), classical_box(gamma.companion(k))], [0.5, 0.5], label=f"emax{gamma.label}")


@lru_cache(maxsize=16)
def _ns_vertex_stack(n: int) -> tuple[tuple[VertexLabel, ...], np.ndarray]:
    labels: list[VertexLabel] = []
    tables: list[np.ndarray] = []
    for lam in enumerate_assignments(n):
        labels.append(lam)
        tables.append(deterministic_box(n, lam).edges)
    for gamma in enumerate_gammas(n, odd=True):
        labels.append(gamma)
        tables.append(pr_box(gamma).edges)
    stacked = np.stack(tables)
    stacked.setflags(write=False)
    return tuple(labels), stacked


def ns_vertex_labels(n: int) -> tuple[VertexLabel, ...]:
    """All 2^n deterministic and 2^{n−1} odd-parity vertices, in sampling order."""
    return _ns_vertex_stack(n)[0]


def random_ns_decomposition(n: int, rng: np.random.Generator) -> Decomposition:
    """Flat-Dirichlet weights over all dichotomic nonsignalling vertices."""
    labels = ns_vertex_labels(n)
    draws = rng.exponential(size=len(labels))
    weights = draws / draws.sum()
    return Decomposition(dict(zip(labels, weights.tolist(), strict=True)))


def random_ns_box(n: int, seed: int | np.random.Generator | None = None) -> Box:
    """
    Random nondisturbing box: flat-Dirichlet mixture of every extremal point.

    Weights are normalized unit-exponential draws, so a fixed seed gives a
    bit-identical box.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    _, stacked = _ns_vertex_stack(n)
    draws = rng.exponential(size=stacked.shape[0])
    return Box(np.tensordot(draws / draws.sum(), stacked, axes=1), label=f"random-ns(n={n})")


def random_local_box(n: int, seed: int | np.random.Generator | None = None, d: int = 2) -> Box:
    """Flat-Dirichlet mixture of the d^n deterministic boxes only."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    tables = np.stack([deterministic_box(n, lam, d).edges for lam in enumerate_assignments(n, d)])
    draws = rng.exponential(size=tables.shape[0])
    return Box(np.tensordot(draws / draws.sum(), tables, axes=1), label=f"random-local(n={n})")


def random_nonlocal_box(
    n: int,
    seed: int | np.random.Generator | None = None,
    min_excess: float = NONLOCAL_MIN_EXCESS,
) -> Box:
    """
    w·p_max^γ + (1 − w)·L for a random odd γ and random local L, with w above
    the facet threshold of L.

    C^γ of the mixture exceeds n − 2 by 2u, u uniform in [min_excess / 2, 1].
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if not 0.0 < min_excess <= 2.0:
        msg = f"Minimum C excess must lie in (0, 2], got {min_excess}"
        raise ValueError(msg)
    odd = list(enumerate_gammas(n, odd=True))
    gamma = odd[int(rng.integers(len(odd)))]
    local = random_local_box(n, rng)
    e = local.edges
    c_local = float(np.dot(gamma.signs, e[:, 0, 0] + e[:, 1, 1] - e[:, 0, 1] - e[:, 1, 0]))
    w_min = (n - 2 - c_local) / (n - c_local)
    u = rng.uniform(min_excess / 2.0, 1.0)
    w = w_min + (1.0 - w_min) * u
    return mix([pr_box(gamma), local], [w, 1.0 - w], label=f"random-nonlocal(n={n})")


# --- CHSH vertices in the (x, y) labelling -----------------------------------


def appendix_deterministic(alpha: int, beta: int, gamma: int, delta: int) -> Box:
    """a = αx ⊕ β, b = γy ⊕ δ, written on the 4-cycle X_0=A_0, X_1=B_0, X_2=A_1, X_3=B_1."""
    a0, a1 = beta, alpha ^ beta
    b0, b1 = delta, gamma ^ delta
    box = deterministic_box(4, (a0, b0, a1, b1))
    return box.with_label(AppendixVertex("det", (alpha, beta, gamma, delta)).label)


def appendix_pr(alpha: int, beta: int, gamma: int) -> Box:
    """a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ on the same 4-cycle labelling."""
    # Edges in cycle order and their (x, y) settings: (A0,B0), (B0,A1), (A1,B1), (B1,A0).
    settings = ((0, 0), (1, 0), (1, 1), (0, 1))
    signs = tuple(
        -1 if (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma else 1
        for x, y in settings
    )
    return pr_box(GammaVector(signs)).with_label(AppendixVertex("pr", (alpha, beta, gamma)).label)


def appendix_vertices() -> dict[AppendixVertex, Box]:
    """The 16 deterministic and 8 nonlocal CHSH vertices."""
    vertices: dict[AppendixVertex, Box] = {}
    for bits in itertools.product((0, 1), repeat=4):
        vertices[AppendixVertex("det", bits)] = appendix_deterministic(*bits)
    for bits in itertools.product((0, 1), repeat=3):
        vertices[AppendixVertex("pr", bits)] = appendix_pr(*bits)
    return vertices


def vertex_box(label: VertexLabel, n: int, d: int = 2) -> Box:
    if isinstance(label, AppendixVertex):
        if label.kind == "det":
            return appendix_deterministic(*label.bits)
        return appendix_pr(*label.bits)
    if isinstance(label, GammaVector):
        return pr_box(label) if label.is_odd else classical_box(label)
    return deterministic_box(n, label, d)


def remix(decomposition: Decomposition, n: int, d: int = 2, *, label: str | None = None) -> Box:
    """Rebuild the box a decomposition describes."""
    boxes = [vertex_box(lab, n, d) for lab, _ in decomposition.items()]
    return mix(boxes, decomposition.normalized_weights(), label=label)
