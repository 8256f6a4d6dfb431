"""The p = 4 covariance estimator.

Pipeline: split the 3N corrupted rows into (trace | opnorm | fit) thirds,
set the truncation level lambda from the plug-in scale, then solve the
min-max program

    argmin over PSD A of sup_v |(1/(lam N)) sum_i psi(lam <x_i, v>^2) - v^T A v|

by a cutting-plane loop: subgradient descent with PSD projection on a
working direction set, alternated with a sphere search for the worst
direction.  The output is accepted when its certified residual fits the
feasibility band; otherwise the breakdown convention returns zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .directions import max_residual, seed_directions
from .errors import InvalidParameterError
from .linalg import as_sample, psd_project, sample_covariance
from .opnorm import DirectionParams, OpNormConfig, estimate_opnorm
from .scalars import estimate_trace


@dataclass(frozen=True)
class ScaleInfo:
    """Plug-in estimates of tr(Sigma) and ||Sigma||."""

    trace_hat: float
    opnorm_hat: float
    r_hat: float

    @classmethod
    def from_estimates(cls, trace_hat: float, opnorm_hat: float) -> "ScaleInfo":
        if opnorm_hat <= 0.0:
            raise InvalidParameterError("opnorm_hat must be positive")
        # independent scalar estimators may disagree; keep r_hat >= 1
        trace_hat = max(trace_hat, opnorm_hat)
        return cls(trace_hat, opnorm_hat, trace_hat / opnorm_hat)

    @classmethod
    def from_matrix(cls, sigma) -> "ScaleInfo":
        from .linalg import op_norm

        sigma = np.asarray(sigma, dtype=float)
        return cls.from_estimates(float(np.trace(sigma)), op_norm(sigma))


@dataclass(frozen=True)
class FitParams:
    outer_steps: int = 10
    inner_steps: int = 500
    step_scale: float = 1.0
    tolerance: float = 1e-3  # outer gap tolerance, relative to 1 + residual


@dataclass(frozen=True)
class P4Config:
    eta: float = 0.0
    delta: float = 0.1
    kappa4: float = 1.5
    c_gamma: float = 2.0
    c_catoni: float = 1.0
    fit: FitParams = field(default_factory=FitParams)
    ds: DirectionParams = field(default_factory=DirectionParams)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError("eta must lie in [0, 1]")
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameterError("delta must lie in (0, 1)")
        if self.kappa4 < 1.0:
            raise InvalidParameterError("kappa4 must be >= 1")
        if self.c_gamma <= 0.0:
            raise InvalidParameterError("c_gamma must be positive")


@dataclass
class FitResult:
    matrix: np.ndarray
    residual: float  # certified lower bound on the true sup at `matrix`
    worst_dir: np.ndarray
    inner_residual: float
    converged: bool
    outer_iters: int


@dataclass
class P4Result:
    matrix: np.ndarray
    fit: Optional[FitResult]
    scale: Optional[ScaleInfo]
    lam: float
    radius: float
    feasible: bool


def lambda_p4(scale: ScaleInfo, cfg: P4Config, N: int) -> float:
    """Truncation level (1/(kappa^2 ||Sigma||)) * sqrt((r + log(1/delta) + eta N)/N)."""
    if N < 1:
        raise InvalidParameterError("N must be at least 1")
    inner = (scale.r_hat + math.log(1.0 / cfg.delta) + cfg.eta * N) / N
    return math.sqrt(inner) / (cfg.kappa4**2 * scale.opnorm_hat)


def gamma_radius(lam: float, scale: ScaleInfo, cfg: P4Config) -> float:
    """Feasibility band half-width C lam kappa^4 ||Sigma||^2 / 2."""
    if lam <= 0.0:
        raise InvalidParameterError("lambda must be positive")
    return cfg.c_gamma * lam * cfg.kappa4**4 * scale.opnorm_hat**2 / 2.0


# ---------------------------------------------------------------------------
# inner solver: min over PSD A of max_k |t_k - v_k^T A v_k|


def fit_targets_psd(
    directions,
    targets,
    init,
    steps: int = 500,
    step_scale: float = 1.0,
    abs_tol: float = 1e-14,
    history: Optional[List[float]] = None,
):
    """Subgradient descent on the max-abs residual with PSD projection.

    Polyak-style steps (residual - level)/||subgradient||^2 aimed at an
    adaptive level gamma * best; the subgradient averages the rank-one
    gradients of near-active constraints (weights proportional to their
    residuals) to kill Chebyshev zigzag.  Both the level and the active
    window anneal toward the best iterate when progress stalls.  Returns
    (A, residual) for the best iterate; `history` collects the accepted
    best residuals, a non-increasing sequence by construction.
    """
    V = np.asarray(directions, dtype=float)
    t = np.asarray(targets, dtype=float).ravel()
    if V.ndim != 2 or V.shape[0] != t.size:
        raise InvalidParameterError("directions and targets must align")
    A = psd_project(init)
    rank_one = V[:, :, None] * V[:, None, :]  # (k, d, d)

    def residuals(M):
        return t - np.einsum("kd,de,ke->k", V, M, V)

    r = residuals(A)
    f = float(np.abs(r).max())
    best_A, best_f = A.copy(), f
    if history is not None:
        history.append(best_f)
    gamma, active_frac = 0.5, 0.5
    stall = 0
    for _ in range(steps):
        if best_f <= abs_tol:
            break
        a = np.abs(r)
        w = np.where(a >= active_frac * f, a, 0.0)
        w_sum = w.sum()
        if w_sum <= 0.0:
            break
        g = np.einsum("k,kde->de", np.sign(r) * (w / w_sum), rank_one)
        g_norm2 = float((g * g).sum())
        if g_norm2 < 1e-300:
            k = int(np.argmax(a))
            g = math.copysign(1.0, r[k]) * rank_one[k]
            g_norm2 = 1.0
        step = step_scale * max(f - gamma * best_f, (1.0 - gamma) * best_f) / g_norm2
        A = psd_project(A + step * g)
        r = residuals(A)
        f = float(np.abs(r).max())
        if f < best_f * (1.0 - 1e-10):
            best_A, best_f = A.copy(), f
            if history is not None:
                history.append(best_f)
            stall = 0
        else:
            stall += 1
            if stall >= 25:
                gamma = 1.0 - (1.0 - gamma) / 2.0
                active_frac = 0.5 * (1.0 + active_frac)
                stall = 0
    return best_A, best_f


def _truncated_targets(X: np.ndarray, V: np.ndarray, lam: float) -> np.ndarray:
    return np.minimum((X @ V.T) ** 2, 1.0 / lam).mean(axis=0)


def fit_minmax_psd(rows, lam: float, cfg: P4Config) -> FitResult:
    """Cutting-plane min-max fit of the truncated quadratic process."""
    if lam <= 0.0:
        raise InvalidParameterError("lambda must be positive")
    X = as_sample(rows)
    d = X.shape[1]
    budget = cfg.ds.resolve_budget(d)

    S = sample_covariance(X)
    A = psd_project(S)
    work = seed_directions(
        X, np.zeros((d, d)), budget, cfg.seed,
        refine_steps=cfg.ds.refine_steps, refine_top=cfg.ds.refine_top,
    ).vectors
    targets = _truncated_targets(X, work, lam)

    inner_res = float("inf")
    cert = float("inf")
    worst = work[0]
    converged = False
    outer = 0
    for outer in range(1, cfg.fit.outer_steps + 1):
        A, inner_res = fit_targets_psd(
            work, targets, A,
            steps=cfg.fit.inner_steps, step_scale=cfg.fit.step_scale,
        )
        search = seed_directions(
            X, A, budget, cfg.seed + outer,
            refine_steps=cfg.ds.refine_steps, refine_top=cfg.ds.refine_top,
        )
        out_res, v_star = max_residual(X, A, lam, search)
        cert = max(inner_res, out_res)
        worst = v_star
        if out_res <= inner_res + cfg.fit.tolerance * (1.0 + inner_res):
            converged = True
            break
        work = np.vstack([work, v_star])
        targets = np.append(targets, _truncated_targets(X, v_star[None, :], lam))
    return FitResult(A, cert, worst, inner_res, converged, outer)


# ---------------------------------------------------------------------------
# the full pipeline


def _zero_result(d: int, lam: float = float("nan")) -> P4Result:
    Z = np.zeros((d, d))
    return P4Result(Z, None, None, lam, float("nan"), True)


def estimate_cov_p4(
    rows,
    cfg: P4Config,
    lambda_override: Optional[float] = None,
    scale_override: Optional[ScaleInfo] = None,
) -> P4Result:
    """Run the boxed p = 4 procedure on a 3N-row corrupted sample.

    Rows [0, N) feed the trace estimator, [N, 2N) the operator-norm
    estimator, [2N, 3N) the min-max fit; a trailing remainder (size mod 3)
    is dropped.  Returns the fitted matrix when its certified residual is
    inside the feasibility band, else the zero matrix.
    """
    X = as_sample(rows)
    N = X.shape[0] // 3
    if N < 1:
        raise InvalidParameterError("need at least 3 rows")
    X = X[: 3 * N]
    d = X.shape[1]
    if not np.any(X):
        return _zero_result(d)

    if scale_override is not None:
        scale = scale_override
    else:
        tr_rows = X[: N - (N % 2)]
        if tr_rows.shape[0] < 6:
            raise InvalidParameterError("trace split too small")
        trace_hat = estimate_trace(tr_rows, cfg.eta, cfg.delta)
        op_cfg = OpNormConfig(
            eta=cfg.eta, delta=min(cfg.delta, 0.2499), kappa4=cfg.kappa4,
            c_catoni=cfg.c_catoni, ds=cfg.ds, seed=cfg.seed + 101,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            opnorm_hat = estimate_opnorm(X[N: 2 * N], op_cfg)
        scale = ScaleInfo.from_estimates(trace_hat, opnorm_hat)

    lam = lambda_override if lambda_override is not None else lambda_p4(scale, cfg, N)
    _warn_small_sample(N, scale, cfg)

    fit = fit_minmax_psd(X[2 * N:], lam, cfg)
    radius = gamma_radius(lam, scale, cfg)
    feasible = fit.residual <= radius
    matrix = fit.matrix if feasible else np.zeros((d, d))
    return P4Result(matrix, fit, scale, lam, radius, feasible)


def _warn_small_sample(N: int, scale: ScaleInfo, cfg: P4Config) -> None:
    need = 10.0 * (scale.r_hat + math.log(1.0 / cfg.delta))
    if N < need:
        warnings.warn(
            f"fit split N={N} below the heuristic threshold {need:.0f}",
            stacklevel=3,
        )


__all__ = [
    "ScaleInfo",
    "FitParams",
    "P4Config",
    "FitResult",
    "P4Result",
    "lambda_p4",
    "gamma_radius",
    "fit_targets_psd",
    "fit_minmax_psd",
    "estimate_cov_p4",
]
