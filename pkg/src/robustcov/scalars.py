"""Scalar robust statistics: quantiles of discrete laws, the split
trimmed mean, the trace estimator, and the contamination lower-bound
functional epsilon(X, eta)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, InvalidInputError
from .linalg import as_sample

#: slack for tail-probability comparisons against accumulated float error
_PROB_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finitely supported distribution given by (value, prob) atoms."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if v.size == 0 or v.size != p.size:
            raise InvalidInputError("atoms need matching nonempty value/prob lists")
        if not np.all(np.isfinite(v)):
            raise InvalidInputError("atom values must be finite")
        if np.any(p < 0.0):
            raise InvalidInputError("atom probabilities must be nonnegative")
        if abs(math.fsum(p.tolist()) - 1.0) > _PROB_TOL:
            raise InvalidInputError("atom probabilities must sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    def mean(self) -> float:
        return math.fsum((v * p for v, p in zip(self.values, self.probs)))

    def shifted(self, c: float) -> "DiscreteDistribution":
        return DiscreteDistribution(self.values + c, self.probs)

    def scaled(self, c: float) -> "DiscreteDistribution":
        return DiscreteDistribution(c * self.values, self.probs)


def fourpoint_y1(eta: float) -> DiscreteDistribution:
    """The heavy-tailed four-point law: +-1/sqrt(eta) w.p. eta/2 each and
    +-1 w.p. (1-eta)/2 each.  Requires eta <= 1/4."""
    if not 0.0 < eta <= 0.25:
        raise InvalidParameterError("four-point law needs eta in (0, 1/4]")
    b = 1.0 / math.sqrt(eta)
    return DiscreteDistribution(
        [-b, -1.0, 1.0, b],
        [eta / 2.0, (1.0 - eta) / 2.0, (1.0 - eta) / 2.0, eta / 2.0],
    )


def fourpoint_y2(eta: float, sigma_sq: float) -> DiscreteDistribution:
    """Y2 = (sigma^2 / sqrt(2 - eta)) * Y1; second moment sigma^4."""
    if sigma_sq <= 0.0:
        raise InvalidParameterError("sigma_sq must be positive")
    return fourpoint_y1(eta).scaled(sigma_sq / math.sqrt(2.0 - eta))


def quantile_Q(dist: DiscreteDistribution, q: float) -> float:
    """Largest atom value M with P(X >= M) >= 1 - q, for q in (0, 1)."""
    if not 0.0 < q < 1.0:
        raise InvalidParameterError("quantile order must lie in (0, 1)")
    best = None
    for val in np.unique(dist.values):
        tail = math.fsum(
            p for v, p in zip(dist.values, dist.probs) if v >= val
        )
        if tail >= 1.0 - q - _PROB_TOL:
            best = val  # unique() is ascending, so the last hit is largest
    return float(best)


def trimmed_mean(values, eps: float) -> float:
    """Split trimmed mean on 2m points.

    The ceil(eps*m)-th smallest and ceil(eps*m)-th largest of the first
    half set the clamp window; the output is the mean of the clamped
    second half.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size < 2 or x.size % 2 != 0:
        raise InvalidParameterError("trimmed mean needs an even number >= 2 of values")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("values must be finite")
    if not 0.0 <= eps < 1.0:
        raise InvalidParameterError("trimming fraction must lie in [0, 1)")
    m = x.size // 2
    k = max(1, math.ceil(eps * m))
    if k > m / 2.0:
        raise InvalidParameterError(
            f"trimming fraction too large: ceil(eps*m)={k} > m/2={m / 2}"
        )
    first = np.sort(x[:m], kind="stable")
    alpha, beta = first[k - 1], first[m - k]
    return float(np.clip(x[m:], alpha, beta).mean())


def estimate_trace(rows, eta: float, delta: float) -> float:
    """Robust trace estimate: trimmed mean of squared row norms with
    eps = 8*eta + 12*log(4/delta)/N (N = number of rows)."""
    X = as_sample(rows)
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameterError("eta must lie in [0, 1]")
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError("delta must lie in (0, 1)")
    eps = trace_trim_fraction(eta, delta, X.shape[0])
    sq_norms = (X * X).sum(axis=1)
    return max(0.0, trimmed_mean(sq_norms, eps))


def trace_trim_fraction(eta: float, delta: float, N: int) -> float:
    return 8.0 * eta + 12.0 * math.log(4.0 / delta) / N


def epsilon_lower_bound(dist: DiscreteDistribution, eta: float) -> float:
    """Largest tail first moment beyond the eta/2 and 1-eta/2 quantiles of
    the centered law; no estimator beats this error under eta-corruption."""
    if not 0.0 < eta < 1.0:
        raise InvalidParameterError("eta must lie in (0, 1)")
    centered = dist.shifted(-dist.mean())
    q_lo = quantile_Q(centered, eta / 2.0)
    q_hi = quantile_Q(centered, 1.0 - eta / 2.0)
    lower = math.fsum(
        p * (q_lo - v)
        for v, p in zip(centered.values, centered.probs)
        if v <= q_lo
    )
    upper = math.fsum(
        p * (v - q_hi)
        for v, p in zip(centered.values, centered.probs)
        if v >= q_hi
    )
    return max(lower, upper, 0.0)


def fourpoint_epsilon_reference(eta: float) -> float:
    """Closed form for the Y1 four-point law: sqrt(eta)/2 - eta/2."""
    if not 0.0 < eta <= 0.25:
        raise InvalidParameterError("closed form needs eta in (0, 1/4]")
    return math.sqrt(eta) / 2.0 - eta / 2.0
