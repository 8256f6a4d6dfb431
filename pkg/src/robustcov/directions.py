"""Approximate suprema over the unit sphere.

Every estimator needs sup over v in S^{d-1} of some functional of the
squared projections <x_i, v>^2.  We approximate it with seeded random
probes plus the eigenvectors of the untruncated residual matrix plus the
coordinate axes, refined by spherical coordinate ascent.  Returned values
are exact evaluations at feasible directions, hence certified lower
bounds on the true supremum.

The ascent is vectorized across directions: bumping coordinate j of every
direction at once is a rank-one update of the projection matrix, so one
trial costs O(N k) instead of O(N k d).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidParameterError
from .linalg import as_sample, check_symmetric, sample_covariance

#: ascent moves smaller than this are considered converged
_MIN_STEP = 1e-7


@dataclass(frozen=True)
class DirectionSet:
    """A finite set of unit directions with its search parameters."""

    vectors: np.ndarray  # (k, d), unit rows
    budget: int
    refine_steps: int = 50
    refine_top: Optional[int] = None  # refine only the top-M candidates

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=float)
        if V.ndim != 2 or V.shape[0] < 1:
            raise InvalidParameterError("direction set must be nonempty")
        nrm = np.linalg.norm(V, axis=1)
        if np.abs(nrm - 1.0).max() > 1e-10:
            raise InvalidParameterError("directions must be unit vectors")
        object.__setattr__(self, "vectors", V)

    def frozen(self) -> "DirectionSet":
        """Copy with refinement disabled (for monotone per-alpha sweeps)."""
        return replace(self, refine_steps=0)


def default_budget(dim: int) -> int:
    return max(256, 32 * dim)


def _dedup_rows(V: np.ndarray) -> np.ndarray:
    seen = {}
    for i, row in enumerate(np.round(V, 12)):
        seen.setdefault(row.tobytes(), i)
    keep = sorted(seen.values())
    return V[keep]


def seed_directions(
    rows,
    A,
    budget: int,
    rng_seed: int,
    refine_steps: int = 50,
    refine_top: Optional[int] = None,
) -> DirectionSet:
    """Probe directions: seeded random units + eigenvectors of
    (sample_covariance - A) + the coordinate axes, deduplicated."""
    if budget < 1:
        raise InvalidParameterError("budget must be at least 1")
    X = as_sample(rows)
    A = check_symmetric(A)
    d = X.shape[1]
    if A.shape[0] != d:
        raise InvalidParameterError("matrix dimension does not match sample")

    rng = np.random.default_rng(rng_seed)
    G = rng.standard_normal((budget, d))
    nrm = np.linalg.norm(G, axis=1)
    G[nrm < 1e-12] = np.eye(d)[0]
    G /= np.linalg.norm(G, axis=1)[:, None]

    _, U = np.linalg.eigh(sample_covariance(X) - A)
    V = np.vstack([G, U.T, np.eye(d)])
    V /= np.linalg.norm(V, axis=1)[:, None]
    return DirectionSet(
        _dedup_rows(V), budget=budget, refine_steps=refine_steps, refine_top=refine_top
    )


# ---------------------------------------------------------------------------
# vectorized spherical coordinate ascent


def ascend(
    mats: Sequence[np.ndarray],
    V: np.ndarray,
    objective: Callable[[Sequence[np.ndarray], np.ndarray], np.ndarray],
    steps: int,
    init_step: float = 0.25,
    ftol: float = 1e-8,
    top: Optional[int] = None,
):
    """Coordinate ascent with renormalization and per-direction step halving.

    mats: samples whose projections the objective consumes.
    objective(projs, V) -> (k,) values; must be an exact evaluation.
    Only accepts strictly improving moves, so per-step monotonicity holds
    by construction.  Returns (V, values) after refinement.
    """
    V = np.array(V, dtype=float)
    projs = [m @ V.T for m in mats]
    vals = objective(projs, V)

    if top is not None and top < len(V):
        idx = np.argsort(-vals, kind="stable")[:top]
        sub_V, sub_vals = ascend(
            [m[:, :] for m in mats],
            V[idx],
            objective,
            steps,
            init_step=init_step,
            ftol=ftol,
            top=None,
        )
        V[idx] = sub_V
        vals[idx] = sub_vals
        return V, vals

    k, d = V.shape
    step = np.full(k, float(init_step))
    for _ in range(steps):
        improved = np.zeros(k, dtype=bool)
        gained = False
        for j in range(d):
            cols = [m[:, j] for m in mats]
            for sgn in (1.0, -1.0):
                coef = sgn * step
                norm = np.sqrt(1.0 + 2.0 * coef * V[:, j] + coef**2)
                inv = 1.0 / norm
                cand_V = V + np.outer(coef, np.eye(d)[j])
                cand_V *= inv[:, None]
                cand_projs = [
                    (P + c[:, None] * coef[None, :]) * inv[None, :]
                    for P, c in zip(projs, cols)
                ]
                cand_vals = objective(cand_projs, cand_V)
                acc = cand_vals > vals
                if np.any(acc):
                    if np.any(cand_vals[acc] > vals[acc] + ftol * np.abs(vals[acc])):
                        gained = True
                    V[acc] = cand_V[acc]
                    for P, CP in zip(projs, cand_projs):
                        P[:, acc] = CP[:, acc]
                    vals[acc] = cand_vals[acc]
                    improved |= acc
        step[~improved] *= 0.5
        if not gained and np.all(step < _MIN_STEP):
            break
    return V, vals


# ---------------------------------------------------------------------------
# the two suprema used throughout


def _residual_objective(A: np.ndarray, lam: float):
    def obj(projs, V):
        clipped = np.minimum(projs[0] ** 2, 1.0 / lam)
        quad = np.einsum("kd,de,ke->k", V, A, V)
        return np.abs(clipped.mean(axis=0) - quad)

    return obj


def max_residual(rows, A, lam: float, ds: DirectionSet):
    """Max over (refined) ds of |truncated_process(s, v, lam) - v^T A v|.

    Returns (value, argdir); the value is a lower bound on the true sup.
    """
    if lam <= 0.0:
        raise InvalidParameterError("truncation level must be positive")
    X = as_sample(rows)
    A = check_symmetric(A)
    if ds.dim != X.shape[1] or A.shape[0] != X.shape[1]:
        raise InvalidParameterError("dimension mismatch")
    V, vals = ascend(
        [X],
        ds.vectors,
        _residual_objective(A, lam),
        ds.refine_steps,
        top=ds.refine_top,
    )
    best = int(np.argmax(vals))
    return float(vals[best]), V[best]


def sup_truncated_mass(rows, alpha: float, ds: DirectionSet) -> float:
    """Max over (refined) ds of (1/N) sum_i psi(alpha^2 <x_i, v>^2)."""
    if alpha <= 0.0:
        raise InvalidParameterError("alpha must be positive")
    X = as_sample(rows)
    if ds.dim != X.shape[1]:
        raise InvalidParameterError("dimension mismatch")

    a2 = alpha * alpha

    def obj(projs, V):
        return np.minimum(a2 * projs[0] ** 2, 1.0).mean(axis=0)

    if ds.refine_steps > 0:
        _, vals = ascend([X], ds.vectors, obj, ds.refine_steps, top=ds.refine_top)
    else:
        vals = obj([X @ ds.vectors.T], ds.vectors)
    return float(vals.max())
