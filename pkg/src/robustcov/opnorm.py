"""Adaptive estimation of the top eigenvalue of the covariance.

Root-finding on the truncated mass phi(alpha) = sup_v (1/N) sum_i
psi(alpha^2 <x_i, v>^2): find alpha_hat with phi(alpha_hat) =
1/(20 c kappa^4) + eta, then report 1/(24 c kappa^4 alpha_hat^2).

One direction set, refined once at alpha = 1 and then frozen, serves all
alpha during the bisection so that phi is exactly nondecreasing in alpha.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .directions import (
    DirectionSet,
    ascend,
    default_budget,
    seed_directions,
    sup_truncated_mass,
)
from .errors import DegenerateSampleError, InvalidParameterError
from .linalg import as_sample, effective_rank, sample_covariance


@dataclass(frozen=True)
class DirectionParams:
    """Knobs for the sphere search shared by the estimators."""

    budget: Optional[int] = None  # None -> max(256, 32 d)
    refine_steps: int = 50
    refine_top: Optional[int] = None

    def resolve_budget(self, dim: int) -> int:
        return self.budget if self.budget is not None else default_budget(dim)


@dataclass(frozen=True)
class OpNormConfig:
    eta: float = 0.0
    delta: float = 0.05
    kappa4: float = 1.5
    c_catoni: float = 1.0
    bisect_tol: float = 1e-6
    ds: DirectionParams = field(default_factory=DirectionParams)
    seed: int = 0

    def __post_init__(self):
        if self.kappa4 < 1.0 or self.c_catoni < 1.0:
            raise InvalidParameterError("kappa4 and c_catoni must be >= 1")
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameterError("delta must lie in (0, 1)")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError("eta must lie in [0, 1]")
        if self.bisect_tol <= 0.0:
            raise InvalidParameterError("bisect_tol must be positive")
        eta_cap = 1.0 / (300.0 * self.c_catoni * self.kappa4**4)
        if self.eta > eta_cap:
            warnings.warn(
                f"eta={self.eta} exceeds the guarantee regime cap {eta_cap:.3g}",
                stacklevel=2,
            )
        if self.delta >= 0.25:
            warnings.warn(
                f"delta={self.delta} outside the guarantee regime (0, 1/4)",
                stacklevel=2,
            )

    @property
    def target(self) -> float:
        return 1.0 / (20.0 * self.c_catoni * self.kappa4**4) + self.eta


def build_phi_directions(rows, cfg: OpNormConfig) -> DirectionSet:
    """Seed + refine at alpha = 1, then freeze for the whole bisection."""
    X = as_sample(rows)
    d = X.shape[1]
    ds = seed_directions(
        X,
        np.zeros((d, d)),
        cfg.ds.resolve_budget(d),
        cfg.seed,
        refine_steps=cfg.ds.refine_steps,
        refine_top=cfg.ds.refine_top,
    )
    if cfg.ds.refine_steps > 0:
        def obj(projs, V):
            return np.minimum(projs[0] ** 2, 1.0).mean(axis=0)

        V, _ = ascend([X], ds.vectors, obj, cfg.ds.refine_steps, top=cfg.ds.refine_top)
        ds = DirectionSet(V, budget=ds.budget, refine_steps=0)
    return ds.frozen()


def phi(rows, alpha: float, cfg: OpNormConfig, ds: Optional[DirectionSet] = None) -> float:
    """Truncated mass sup at level alpha over the frozen direction set."""
    if ds is None:
        ds = build_phi_directions(rows, cfg)
    return sup_truncated_mass(rows, alpha, ds.frozen())


def solve_alpha_hat(rows, cfg: OpNormConfig, ds: Optional[DirectionSet] = None) -> float:
    """Bisection for phi(alpha_hat) = 1/(20 c kappa^4) + eta.

    Returns alpha_hat with |phi(alpha_hat) - target| <= bisect_tol or
    bracket width <= bisect_tol * alpha_hat (phi can have flat spots).
    """
    target = cfg.target
    if target >= 1.0:
        raise InvalidParameterError("root target 1/(20 c kappa^4) + eta must be < 1")
    X = as_sample(rows)
    if not np.any(X):
        raise DegenerateSampleError("all-zero sample: phi stays at 0")
    if ds is None:
        ds = build_phi_directions(X, cfg)
    ds = ds.frozen()

    hi = 1.0
    for _ in range(200):
        if sup_truncated_mass(X, hi, ds) >= target:
            break
        hi *= 2.0
    else:
        raise DegenerateSampleError("phi never reaches the root target")
    lo = 0.0
    mid = hi
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        val = sup_truncated_mass(X, mid, ds)
        if abs(val - target) <= cfg.bisect_tol:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= cfg.bisect_tol * max(mid, 1e-300):
            return mid
    return mid


def estimate_opnorm(rows, cfg: OpNormConfig, ds: Optional[DirectionSet] = None) -> float:
    """Plug alpha_hat into 1/(24 c kappa^4 alpha_hat^2)."""
    X = as_sample(rows)
    _check_sample_size(X, cfg)
    alpha_hat = solve_alpha_hat(X, cfg, ds)
    return 1.0 / (24.0 * cfg.c_catoni * cfg.kappa4**4 * alpha_hat**2)


def _check_sample_size(X: np.ndarray, cfg: OpNormConfig) -> None:
    S = sample_covariance(X)
    try:
        r_hat = effective_rank(S)
    except Exception:
        return
    ck4 = cfg.c_catoni * cfg.kappa4**4
    need = 100.0 * ck4 * r_hat + 400.0 * ck4 * math.log(1.0 / cfg.delta)
    if X.shape[0] < need:
        warnings.warn(
            f"N={X.shape[0]} below the guarantee-regime size {need:.0f}",
            stacklevel=3,
        )
