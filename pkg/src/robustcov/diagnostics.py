"""Desk-scale oracles for the sparse-supremum statistic and the
peaky/spread decomposition of the quadratic empirical process."""

from __future__ import annotations

import math
from itertools import combinations
from typing import Tuple

import numpy as np

from .directions import DirectionSet, ascend
from .errors import FeasibilityError, InvalidParameterError
from .linalg import as_sample, check_symmetric

#: cap on enumerated subsets for the brute-force oracle
SUBSET_BUDGET = 10**6


def _gram_top(rows: np.ndarray) -> float:
    G = rows @ rows.T
    return float(np.linalg.eigvalsh(G)[-1])


def f_stat_bruteforce(rows, k: int) -> float:
    """Exact sup over unit k-sparse y of ||sum_i y_i x_i||^2.

    Equals the max over supports |I| <= k of the top eigenvalue of the
    Gram matrix of the selected rows; supersets dominate, so only size-k
    supports are enumerated.
    """
    X = as_sample(rows)
    N = X.shape[0]
    if not 1 <= k <= N:
        raise InvalidParameterError(f"k={k} outside [1, {N}]")
    if math.comb(N, k) > SUBSET_BUDGET:
        raise FeasibilityError(
            f"C({N},{k}) = {math.comb(N, k)} exceeds the {SUBSET_BUDGET} subset budget"
        )
    if k == 1:
        return float((X * X).sum(axis=1).max())
    best = 0.0
    for I in combinations(range(N), k):
        best = max(best, _gram_top(X[list(I)]))
    return best


def f_stat_greedy(rows, k: int) -> float:
    """Greedy forward selection of rows maximizing the growing Gram's top
    eigenvalue; a lower bound on the brute-force value."""
    X = as_sample(rows)
    N = X.shape[0]
    if not 1 <= k <= N:
        raise InvalidParameterError(f"k={k} outside [1, {N}]")
    chosen: list[int] = []
    free = list(range(N))
    best = 0.0
    for _ in range(k):
        step_best, step_idx = -1.0, -1
        for i in free:
            val = _gram_top(X[chosen + [i]])
            if val > step_best:
                step_best, step_idx = val, i
        chosen.append(step_idx)
        free.remove(step_idx)
        best = step_best
    return best


def decompose_directions(rows, lam: float, ref, V: np.ndarray):
    """Per-direction (peaky, spread, total) triples on the given directions."""
    X = as_sample(rows)
    R = check_symmetric(ref)
    P2 = (X @ V.T) ** 2
    quad = np.einsum("kd,de,ke->k", V, R, V)
    total = np.abs(P2.mean(axis=0) - quad)
    spread = np.abs(np.minimum(P2, 1.0 / lam).mean(axis=0) - quad)
    peaky = np.where(P2 > 1.0 / lam, P2, 0.0).mean(axis=0)
    return peaky, spread, total


def peaky_spread_decompose(rows, lam: float, ref, ds: DirectionSet) -> Tuple[float, float, float]:
    """Suprema of the peaky part, the truncated (spread) residual, and the
    untruncated residual, all on one shared refined direction set."""
    if lam <= 0.0:
        raise InvalidParameterError("lambda must be positive")
    X = as_sample(rows)
    R = check_symmetric(ref)

    def total_obj(projs, V):
        quad = np.einsum("kd,de,ke->k", V, R, V)
        return np.abs((projs[0] ** 2).mean(axis=0) - quad)

    if ds.refine_steps > 0:
        V, _ = ascend([X], ds.vectors, total_obj, ds.refine_steps, top=ds.refine_top)
    else:
        V = ds.vectors
    peaky, spread, total = decompose_directions(X, lam, R, V)
    return float(peaky.max()), float(spread.max()), float(total.max())
