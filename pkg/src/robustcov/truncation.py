"""Truncation primitives and the truncated quadratic empirical processes.

For y >= 0 the identity (1/lam) * psi(lam * y) == min(y, 1/lam) lets every
process below reduce to a clipped mean, which is what the vectorized paths
use.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError, InvalidInputError
from .linalg import as_sample

UNIT_TOL = 1e-10


def psi(x):
    """Clip to [-1, 1]: identity inside, sign(x) outside.

    Works elementwise on arrays; scalars in, scalar out.
    """
    out = np.clip(x, -1.0, 1.0)
    if np.ndim(x) == 0:
        return float(out)
    return out


def clamp_interval(x, lo: float, hi: float):
    """Clamp x to [lo, hi]; the general two-sided truncation helper."""
    if not lo <= hi:
        raise InvalidParameterError(f"empty clamp interval [{lo}, {hi}]")
    out = np.clip(x, lo, hi)
    if np.ndim(x) == 0:
        return float(out)
    return out


def psi_band(x, lambda1: float, lambda2: float):
    """Two-sided truncation with levels lambda1 >= lambda2 > 0.

    Clamps x to [-1/lambda1, 1/lambda2], so psi_band(x, lam, lam) equals
    (1/lam) * psi(lam * x) exactly.
    """
    if not (lambda1 >= lambda2 > 0.0):
        raise InvalidParameterError(
            f"need lambda1 >= lambda2 > 0, got {lambda1}, {lambda2}"
        )
    return clamp_interval(x, -1.0 / lambda1, 1.0 / lambda2)


def check_unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).ravel()
    nrm = float(np.linalg.norm(v))
    if not np.isfinite(nrm) or abs(nrm - 1.0) > UNIT_TOL:
        raise InvalidInputError(f"direction is not a unit vector (norm={nrm})")
    return v


def truncated_process(rows, v, lam: float) -> float:
    """(1/(lam*N)) sum_i psi(lam * <x_i, v>^2); lies in [0, 1/lam]."""
    if lam <= 0.0:
        raise InvalidParameterError("truncation level must be positive")
    X = as_sample(rows)
    v = check_unit(v)
    proj2 = (X @ v) ** 2
    return float(np.minimum(proj2, 1.0 / lam).mean())


def one_sided_process(rows, v, q_v: float, Q: float) -> float:
    """Direction-trimmed process at level lam_v = 1/(q_v + Q).

    Equals the clipped mean of squared projections at q_v + Q;
    lies in [0, q_v + Q].
    """
    if Q <= 0.0:
        raise InvalidParameterError("trimming scale Q must be positive")
    if q_v < 0.0:
        raise InvalidParameterError("directional quantile must be nonnegative")
    X = as_sample(rows)
    v = check_unit(v)
    proj2 = (X @ v) ** 2
    return float(np.minimum(proj2, q_v + Q).mean())


def trim_level(q_v: float, Q: float) -> float:
    """lam_v(Q) = 1 / (q_v + Q)."""
    if Q <= 0.0:
        raise InvalidParameterError("trimming scale Q must be positive")
    return 1.0 / (q_v + Q)


def norm_truncate(rows, R: float) -> np.ndarray:
    """Zero out rows with Euclidean norm exceeding R; keeps N and d."""
    if R <= 0.0:
        raise InvalidParameterError("truncation radius must be positive")
    X = as_sample(rows).copy()
    X[np.linalg.norm(X, axis=1) > R] = 0.0
    return X


def norm_truncation_radius(N: int, trace: float, opnorm: float) -> float:
    """R = (N * tr(Sigma) * ||Sigma||)^(1/4)."""
    if N < 1 or trace <= 0.0 or opnorm <= 0.0:
        raise InvalidParameterError("radius needs N >= 1 and positive scale")
    return float((N * trace * opnorm) ** 0.25)
