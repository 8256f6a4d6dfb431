"""The p > 4 covariance estimator with direction-dependent trimming.

Boxed procedure: split the 2N corrupted rows in half and zero out rows
with norm above R = (N tr ||Sigma||)^(1/4); set eps = max(20 eta,
560 log(2/delta)/N); serve directional quantiles q_v (the ceil(N eps/2)-th
largest squared projection on the first half); for each dyadic Q fit a
PSD matrix to the one-sided process trimmed at q_v + Q with feasibility
band 4 eps Q; return the fit at the smallest feasible level.

Selection is restricted to Q > 2 * opnorm_hat: the analysis requires the
trimming scale to sit above the operator norm (for eps < 1 the target
level exceeds ||Sigma||), and without the floor spuriously feasible tiny
levels produce heavily shrunk fits.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .covp4 import FitParams, ScaleInfo, fit_targets_psd
from .directions import ascend, seed_directions
from .errors import InvalidParameterError
from .linalg import as_sample, psd_project, sample_covariance
from .opnorm import DirectionParams, OpNormConfig, estimate_opnorm
from .scalars import estimate_trace
from .truncation import norm_truncate, norm_truncation_radius


@dataclass(frozen=True)
class Pgt4Config:
    eta: float = 0.0
    delta: float = 0.1
    p: float = 6.0
    kappa_p: float = 2.0
    scale: Optional[ScaleInfo] = None  # oracle scale; None -> plug-in prefix
    q_grid: Optional[Tuple[int, int]] = None  # dyadic exponent range, None -> auto
    fit: FitParams = field(default_factory=FitParams)
    ds: DirectionParams = field(default_factory=DirectionParams)
    seed: int = 0

    def __post_init__(self):
        if self.p <= 4.0:
            raise InvalidParameterError("the p > 4 estimator needs p > 4")
        if not 0.0 < self.delta < 1.0:
            raise InvalidParameterError("delta must lie in (0, 1)")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError("eta must lie in [0, 1]")
        if self.kappa_p < 1.0:
            raise InvalidParameterError("kappa_p must be >= 1")


def epsilon_pgt4(eta: float, delta: float, N: int) -> float:
    """eps = max(20 eta, 560 log(2/delta)/N); warns when >= 1."""
    if N < 1:
        raise InvalidParameterError("N must be at least 1")
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError("delta must lie in (0, 1)")
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameterError("eta must lie in [0, 1]")
    eps = max(20.0 * eta, 560.0 * math.log(2.0 / delta) / N)
    if eps >= 1.0:
        warnings.warn(f"eps={eps:.3g} >= 1 is outside the guarantee regime", stacklevel=2)
    return eps


def directional_quantile(zrows, v, eps: float) -> float:
    """k-th largest squared projection along v, k = ceil(N eps / 2)."""
    Z = as_sample(zrows)
    N = Z.shape[0]
    k = math.ceil(N * eps / 2.0)
    if not 1 <= k <= N:
        raise InvalidParameterError(f"rearrangement index k={k} outside [1, {N}]")
    proj2 = (Z @ np.asarray(v, dtype=float).ravel()) ** 2
    return float(np.partition(proj2, N - k)[N - k])


class QuantileOracle:
    """Directional quantiles from the held-out half, memoized per direction.

    The quantile index is clamped to [1, N] so the pipeline degrades
    gracefully when eps >= 2 (only reachable outside the guarantee regime).
    """

    def __init__(self, zrows, eps: float):
        self.Z = as_sample(zrows)
        self.N = self.Z.shape[0]
        self.k = min(max(math.ceil(self.N * eps / 2.0), 1), self.N)
        self._memo: Dict[bytes, float] = {}

    def __call__(self, v) -> float:
        v = np.asarray(v, dtype=float).ravel()
        key = np.round(v, 12).tobytes()
        hit = self._memo.get(key)
        if hit is None:
            proj2 = (self.Z @ v) ** 2
            hit = float(np.partition(proj2, self.N - self.k)[self.N - self.k])
            self._memo[key] = hit
        return hit

    def batch(self, V: np.ndarray) -> np.ndarray:
        return np.array([self(v) for v in V])

    def batch_from_projections(self, P: np.ndarray, V: np.ndarray) -> np.ndarray:
        """Quantiles for many candidate directions given Z-projections P."""
        out = np.empty(V.shape[0])
        todo = []
        for i, v in enumerate(V):
            key = np.round(v, 12).tobytes()
            hit = self._memo.get(key)
            if hit is None:
                todo.append(i)
            else:
                out[i] = hit
        if todo:
            cols = np.asarray(todo)
            part = np.partition(P[:, cols] ** 2, self.N - self.k, axis=0)[self.N - self.k]
            for j, i in enumerate(todo):
                val = float(part[j])
                out[i] = val
                self._memo[np.round(V[i], 12).tobytes()] = val
        return out


def q_grid_auto(zrows, scale: ScaleInfo) -> np.ndarray:
    """Dyadic grid 2^i covering the realizable trimming scales."""
    Z = as_sample(zrows)
    sq = (Z * Z).sum(axis=1)
    i_min = math.floor(math.log2(scale.opnorm_hat)) - 2
    i_max = math.ceil(math.log2(float(sq.max()) + scale.opnorm_hat)) + 1
    return 2.0 ** np.arange(i_min, i_max + 1)


@dataclass
class GammaFitResult:
    Q: float
    matrix: np.ndarray
    residual: float
    feasible: bool
    inner_residual: float
    converged: bool
    band: float


def _one_sided_targets(X: np.ndarray, V: np.ndarray, qs: np.ndarray, Q: float) -> np.ndarray:
    return np.minimum((X @ V.T) ** 2, (qs + Q)[None, :]).mean(axis=0)


def fit_gamma_Q(
    xrows,
    Q: float,
    q_oracle: QuantileOracle,
    eps: float,
    cfg: Pgt4Config,
    warm: Optional[np.ndarray] = None,
) -> GammaFitResult:
    """Min-max fit of the one-sided process at trimming scale Q.

    Same cutting-plane scheme as the p = 4 fit, with per-direction
    trimming level 1/(q_v + Q); feasible iff the certified residual is
    within the 4 eps Q band.
    """
    if Q <= 0.0:
        raise InvalidParameterError("Q must be positive")
    X = as_sample(xrows)
    d = X.shape[1]
    band = 4.0 * eps * Q
    budget = cfg.ds.resolve_budget(d)

    A = psd_project(sample_covariance(X)) if warm is None else warm.copy()
    work = seed_directions(
        X, np.zeros((d, d)), budget, cfg.seed,
        refine_steps=cfg.ds.refine_steps, refine_top=cfg.ds.refine_top,
    ).vectors
    targets = _one_sided_targets(X, work, q_oracle.batch(work), Q)

    def search_objective(projs, V):
        qs = q_oracle.batch_from_projections(projs[1], V)
        clipped = np.minimum(projs[0] ** 2, (qs + Q)[None, :])
        quad = np.einsum("kd,de,ke->k", V, A, V)
        return np.abs(clipped.mean(axis=0) - quad)

    inner_res = float("inf")
    cert = float("inf")
    converged = False
    for outer in range(1, cfg.fit.outer_steps + 1):
        A, inner_res = fit_targets_psd(
            work, targets, A,
            steps=cfg.fit.inner_steps, step_scale=cfg.fit.step_scale,
        )
        if inner_res > 2.0 * band:
            # certified lower bound already far outside the band
            return GammaFitResult(Q, A, inner_res, False, inner_res, True, band)
        search = seed_directions(
            X, A, budget, cfg.seed + outer,
            refine_steps=cfg.ds.refine_steps, refine_top=cfg.ds.refine_top,
        )
        V, vals = ascend(
            [X, q_oracle.Z], search.vectors, search_objective,
            search.refine_steps, top=search.refine_top,
        )
        best = int(np.argmax(vals))
        out_res, v_star = float(vals[best]), V[best]
        cert = max(inner_res, out_res)
        if out_res <= inner_res + cfg.fit.tolerance * (1.0 + inner_res):
            converged = True
            break
        work = np.vstack([work, v_star])
        targets = np.append(
            targets, _one_sided_targets(X, v_star[None, :], q_oracle.batch(v_star[None, :]), Q)
        )
    return GammaFitResult(Q, A, cert, cert <= band, inner_res, converged, band)


@dataclass
class Pgt4Result:
    matrix: np.ndarray
    selected_Q: float
    feasible: bool
    eps: float
    diameter_proxy: float  # 8 eps Q at the selected level
    scale: Optional[ScaleInfo]
    radius_R: float
    levels: List[GammaFitResult]
    used_top_level: bool


def _zero_result(d: int, eps: float = float("nan")) -> Pgt4Result:
    return Pgt4Result(
        np.zeros((d, d)), float("nan"), False, eps, float("nan"),
        None, float("nan"), [], False,
    )


def estimate_cov_pgt4(rows, cfg: Pgt4Config) -> Pgt4Result:
    """Run the boxed p > 4 procedure on a 2N-row corrupted sample.

    With cfg.scale unset, a held-out prefix (two quarters of the input)
    feeds the trace and operator-norm estimators and the remaining rows
    form the 2N sample; with an oracle scale the whole input is the 2N
    sample.  A trailing odd row is dropped.
    """
    X = as_sample(rows)
    d = X.shape[1]
    if not np.any(X):
        return _zero_result(d)

    if cfg.scale is not None:
        scale = cfg.scale
        body = X
    else:
        q = X.shape[0] // 4
        tr_rows = X[: q - (q % 2)]
        if tr_rows.shape[0] < 6:
            raise InvalidParameterError("scale prefix too small")
        trace_hat = estimate_trace(tr_rows, cfg.eta, cfg.delta)
        op_cfg = OpNormConfig(
            eta=cfg.eta, delta=min(cfg.delta, 0.2499), kappa4=min(cfg.kappa_p, 5.0),
            c_catoni=1.0, ds=cfg.ds, seed=cfg.seed + 101,
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            opnorm_hat = estimate_opnorm(X[q: 2 * q], op_cfg)
        scale = ScaleInfo.from_estimates(trace_hat, opnorm_hat)
        body = X[2 * q:]

    N = body.shape[0] // 2
    if N < 1:
        raise InvalidParameterError("need at least 2 rows for the split")
    body = body[: 2 * N]

    R = norm_truncation_radius(N, scale.trace_hat, scale.opnorm_hat)
    Z = norm_truncate(body[:N], R)
    Xh = norm_truncate(body[N:], R)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        eps = epsilon_pgt4(cfg.eta, cfg.delta, N)
    oracle = QuantileOracle(Z, eps)

    if cfg.q_grid is not None:
        grid = 2.0 ** np.arange(cfg.q_grid[0], cfg.q_grid[1] + 1)
    else:
        grid = q_grid_auto(Z, scale)
    floor = 2.0 * scale.opnorm_hat
    candidates = [float(Q) for Q in grid if Q >= floor * (1.0 - 1e-12)]
    if not candidates:
        candidates = [float(grid[-1])]

    levels: List[GammaFitResult] = []
    chosen: Optional[GammaFitResult] = None
    for Q in candidates:
        res = fit_gamma_Q(Xh, Q, oracle, eps, cfg)
        levels.append(res)
        if res.feasible:
            chosen = res
            break

    if chosen is None:
        out = _zero_result(d, eps)
        out.scale = scale
        out.radius_R = R
        out.levels = levels
        return out
    return Pgt4Result(
        chosen.matrix, chosen.Q, True, eps, 8.0 * eps * chosen.Q,
        scale, R, levels, used_top_level=(chosen.Q == candidates[-1]),
    )
