"""Heavy-tailed samplers, contamination adversaries, and the Monte Carlo
experiment runner.

Reproducibility contract: every cell of an experiment grid draws from a
counter-based Philox stream keyed by (master seed, cell index), so records
do not depend on execution order or thread count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .covp4 import FitParams, P4Config, ScaleInfo, estimate_cov_p4
from .covpgt4 import Pgt4Config, estimate_cov_pgt4
from .errors import InvalidParameterError
from .linalg import as_sample, op_norm, psd_project, sample_covariance
from .opnorm import DirectionParams, OpNormConfig, estimate_opnorm
from .scalars import estimate_trace

ESTIMATORS = ("sample_cov", "p4", "pgt4", "trace", "opnorm")

CSV_HEADER = (
    "cell,trial,seed,N,d,eta,delta,distribution,adversary,kappa4,"
    "err_sample_cov,err_p4,err_pgt4,err_trace,err_opnorm,status"
)


def _rng(seed_key) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed_key)))


def gaussian_kappa(q: float) -> float:
    """kappa(q) for a Gaussian marginal: (E|g|^q)^(1/q)."""
    if q < 2.0:
        raise InvalidParameterError("kappa(q) needs q >= 2")
    log_absmom = 0.5 * q * math.log(2.0) + math.lgamma((q + 1.0) / 2.0) - math.lgamma(0.5)
    return math.exp(log_absmom / q)


@dataclass(frozen=True)
class DistributionSpec:
    """What to sample: the law and its true second-moment matrix."""

    kind: str  # gaussian | elliptical_t | fourpoint | custom_psd
    sigma: Optional[np.ndarray] = None
    nu: float = 9.0
    eta_param: float = 0.04
    sigma_sq: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "elliptical_t", "fourpoint", "custom_psd"):
            raise InvalidParameterError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "elliptical_t" and self.nu <= 4.0:
            raise InvalidParameterError("elliptical t needs nu > 4 for finite 4th moments")
        if self.kind == "fourpoint":
            if not 0.0 < self.eta_param <= 0.25:
                raise InvalidParameterError("fourpoint needs eta_param in (0, 1/4]")
            if self.sigma_sq <= 0.0:
                raise InvalidParameterError("fourpoint needs sigma_sq > 0")
        elif self.sigma is None:
            raise InvalidParameterError(f"{self.kind} needs a sigma matrix")

    @property
    def dim(self) -> int:
        return 1 if self.kind == "fourpoint" else int(self.sigma.shape[0])

    def true_sigma(self) -> np.ndarray:
        if self.kind == "fourpoint":
            return np.array([[self.sigma_sq**2]])
        return np.asarray(self.sigma, dtype=float)

    def kappa4(self) -> float:
        if self.kind in ("gaussian", "custom_psd"):
            return 3.0**0.25
        if self.kind == "elliptical_t":
            return (3.0 * (self.nu - 2.0) / (self.nu - 4.0)) ** 0.25
        e2 = 2.0 - self.eta_param
        e4 = 1.0 / self.eta_param + 1.0 - self.eta_param
        return (e4 / e2**2) ** 0.25

    def tag(self) -> str:
        if self.kind == "elliptical_t":
            return f"elliptical_t({self.nu:g})"
        if self.kind == "fourpoint":
            return f"fourpoint({self.eta_param:g},{self.sigma_sq:g})"
        return self.kind


def sqrt_psd(sigma) -> np.ndarray:
    S = psd_project(sigma)
    w, U = np.linalg.eigh(S)
    return (U * np.sqrt(np.maximum(w, 0.0))) @ U.T


def sample_gaussian(sigma, N: int, seed) -> np.ndarray:
    """N zero-mean Gaussian rows with covariance sigma."""
    root = sqrt_psd(sigma)
    g = _rng(seed).standard_normal((N, root.shape[0]))
    return g @ root


def sample_elliptical_t(sigma, nu: float, N: int, seed) -> np.ndarray:
    """Multivariate t with nu dof scaled so the covariance equals sigma."""
    if nu <= 4.0:
        raise InvalidParameterError("elliptical t sampler needs nu > 4")
    scale = (nu - 2.0) / nu
    root = sqrt_psd(np.asarray(sigma, dtype=float) * scale)
    rng = _rng(seed)
    g = rng.standard_normal((N, root.shape[0]))
    w = rng.chisquare(nu, size=N)
    return (g @ root) * np.sqrt(nu / w)[:, None]


def sample_fourpoint(eta_param: float, sigma_sq: float, N: int, seed) -> np.ndarray:
    """i.i.d. draws of the scaled four-point law Y2, as an (N, 1) sample."""
    if not 0.0 < eta_param <= 0.25:
        raise InvalidParameterError("fourpoint sampler needs eta_param in (0, 1/4]")
    b = 1.0 / math.sqrt(eta_param)
    values = np.array([-b, -1.0, 1.0, b]) * (sigma_sq / math.sqrt(2.0 - eta_param))
    probs = np.array(
        [eta_param / 2.0, (1.0 - eta_param) / 2.0, (1.0 - eta_param) / 2.0, eta_param / 2.0]
    )
    idx = _rng(seed).choice(4, size=N, p=probs)
    return values[idx][:, None]


def sample_distribution(spec: DistributionSpec, N: int, seed) -> np.ndarray:
    if spec.kind in ("gaussian", "custom_psd"):
        return sample_gaussian(spec.sigma, N, seed)
    if spec.kind == "elliptical_t":
        return sample_elliptical_t(spec.sigma, spec.nu, N, seed)
    return sample_fourpoint(spec.eta_param, spec.sigma_sq, N, seed)


# ---------------------------------------------------------------------------
# contamination


@dataclass(frozen=True)
class ContaminationSpec:
    """Adversary: which rows get replaced and with what."""

    kind: str  # none | fixed_outlier | variance_inflation | quantile_replace
    eta: float = 0.0
    magnitude: float = 100.0
    direction: Optional[np.ndarray] = None  # fixed_outlier; None -> first axis
    factor: float = 10.0

    def __post_init__(self):
        if self.kind not in ("none", "fixed_outlier", "variance_inflation", "quantile_replace"):
            raise InvalidParameterError(f"unknown adversary kind {self.kind!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError("eta must lie in [0, 1]")

    def tag(self) -> str:
        if self.kind == "fixed_outlier":
            return f"fixed_outlier({self.magnitude:g})"
        if self.kind == "variance_inflation":
            return f"variance_inflation({self.factor:g})"
        return self.kind


def contaminate(rows, spec: ContaminationSpec, seed) -> np.ndarray:
    """Replace floor(eta N) rows per the adversary; all others bit-identical."""
    X = as_sample(rows).copy()
    if spec.kind == "none":
        return X
    N, d = X.shape
    m = int(math.floor(spec.eta * N))
    if m == 0:
        return X

    if spec.kind == "quantile_replace":
        norms = np.linalg.norm(X, axis=1)
        order = np.argsort(-norms, kind="stable")
        idx = order[:m]
        pivot = norms[order[m]] if m < N else 0.0
        for i in idx:
            if norms[i] > 0.0:
                X[i] = X[i] * (pivot / norms[i])
            else:
                X[i] = pivot * np.eye(d)[0]
        return X

    idx = _rng(seed).choice(N, size=m, replace=False)
    if spec.kind == "fixed_outlier":
        direction = np.eye(d)[0] if spec.direction is None else np.asarray(spec.direction, float)
        nrm = np.linalg.norm(direction)
        if nrm <= 0.0:
            raise InvalidParameterError("outlier direction must be nonzero")
        X[idx] = spec.magnitude * direction / nrm
    else:  # variance_inflation
        X[idx] = X[idx] * spec.factor
    return X


# ---------------------------------------------------------------------------
# experiment runner


@dataclass(frozen=True)
class EstimatorOptions:
    """Estimator tuning shared across cells (desk-scale defaults)."""

    kappa_mode: str = "oracle"  # oracle | fixed
    kappa4: float = 1.5
    scale_mode: str = "plugin"  # plugin | oracle
    p: float = 6.0
    c_gamma: float = 2.0
    c_catoni: float = 1.0
    budget: int = 48
    refine_steps: int = 6
    refine_top: Optional[int] = 8
    outer_steps: int = 4
    inner_steps: int = 300
    tolerance: float = 1e-3

    def direction_params(self) -> DirectionParams:
        return DirectionParams(self.budget, self.refine_steps, self.refine_top)

    def fit_params(self) -> FitParams:
        return FitParams(self.outer_steps, self.inner_steps, 1.0, self.tolerance)


@dataclass(frozen=True)
class ExperimentConfig:
    distributions: Sequence[DistributionSpec]
    adversaries: Sequence[ContaminationSpec]
    n_values: Sequence[int]
    eta_values: Sequence[float]
    delta: float = 0.1
    trials: int = 10
    estimators: Sequence[str] = ("sample_cov", "p4")
    seed: int = 0
    output: str = "records.csv"
    options: EstimatorOptions = field(default_factory=EstimatorOptions)

    def cells(self):
        return list(
            product(
                self.distributions,
                self.adversaries,
                self.n_values,
                self.eta_values,
                range(self.trials),
            )
        )


@dataclass
class ExperimentRecord:
    cell: int
    trial: int
    seed: int
    N: int
    d: int
    eta: float
    delta: float
    distribution: str
    adversary: str
    kappa4: float
    errors: Dict[str, float]
    wall_time: float
    status: str = "ok"

    def csv_row(self, with_timing: bool = False) -> str:
        cols = [
            str(self.cell), str(self.trial), str(self.seed), str(self.N),
            str(self.d), repr(self.eta), repr(self.delta),
            self.distribution, self.adversary, repr(self.kappa4),
        ]
        for name in ESTIMATORS:
            err = self.errors.get(name)
            cols.append("" if err is None else repr(err))
        cols.append(self.status)
        if with_timing:
            cols.append(f"{self.wall_time:.3f}")
        return ",".join(cols)


def n_threads() -> int:
    cap = os.environ.get("ROBUSTCOV_THREADS")
    avail = os.cpu_count() or 1
    if cap is None:
        return avail
    return max(1, min(int(cap), avail))


def _cell_kappa(opts: EstimatorOptions, dist: DistributionSpec) -> float:
    return dist.kappa4() if opts.kappa_mode == "oracle" else opts.kappa4


def run_cell(cfg: ExperimentConfig, cell_index: int, cell) -> ExperimentRecord:
    dist, adv, N, eta, trial = cell
    opts = cfg.options
    seed_int = int(np.random.SeedSequence((cfg.seed, cell_index)).generate_state(1)[0])
    t0 = time.perf_counter()
    sigma = dist.true_sigma()
    kappa4 = _cell_kappa(opts, dist)
    record = ExperimentRecord(
        cell=cell_index, trial=trial, seed=seed_int, N=N, d=dist.dim,
        eta=eta, delta=cfg.delta, distribution=dist.tag(),
        adversary=replace(adv, eta=eta).tag(), kappa4=kappa4,
        errors={}, wall_time=0.0,
    )
    try:
        clean = sample_distribution(dist, N, (cfg.seed, cell_index, 0))
        corrupted = contaminate(
            clean, replace(adv, eta=eta),
            int(np.random.SeedSequence((cfg.seed, cell_index, 1)).generate_state(1)[0]),
        )
        truth_op = op_norm(sigma)
        oracle_scale = ScaleInfo.from_matrix(sigma)
        for name in cfg.estimators:
            if name == "sample_cov":
                err = op_norm(sample_covariance(corrupted) - sigma)
            elif name == "p4":
                p4cfg = P4Config(
                    eta=eta, delta=cfg.delta, kappa4=kappa4,
                    c_gamma=opts.c_gamma, c_catoni=opts.c_catoni,
                    fit=opts.fit_params(), ds=opts.direction_params(),
                    seed=seed_int,
                )
                scale = oracle_scale if opts.scale_mode == "oracle" else None
                res = estimate_cov_p4(corrupted, p4cfg, scale_override=scale)
                err = op_norm(res.matrix - sigma)
            elif name == "pgt4":
                pcfg = Pgt4Config(
                    eta=eta, delta=cfg.delta, p=opts.p, kappa_p=max(kappa4, 1.0),
                    scale=oracle_scale if opts.scale_mode == "oracle" else None,
                    fit=opts.fit_params(), ds=opts.direction_params(),
                    seed=seed_int,
                )
                res = estimate_cov_pgt4(corrupted, pcfg)
                err = op_norm(res.matrix - sigma)
            elif name == "trace":
                rows = corrupted[: corrupted.shape[0] - (corrupted.shape[0] % 2)]
                err = abs(estimate_trace(rows, eta, cfg.delta) - float(np.trace(sigma)))
            elif name == "opnorm":
                ocfg = OpNormConfig(
                    eta=eta, delta=min(cfg.delta, 0.2499), kappa4=kappa4,
                    c_catoni=opts.c_catoni, ds=opts.direction_params(),
                    seed=seed_int,
                )
                err = abs(estimate_opnorm(corrupted, ocfg) - truth_op)
            else:
                raise InvalidParameterError(f"unknown estimator {name!r}")
            record.errors[name] = float(err)
    except Exception as exc:  # failed cells become rows, not aborts
        record.status = f"error:{type(exc).__name__}"
    record.wall_time = time.perf_counter() - t0
    return record


def run_experiment(cfg: ExperimentConfig) -> List[ExperimentRecord]:
    """Run every (distribution, adversary, N, eta, trial) cell.

    Cells execute concurrently (capped by ROBUSTCOV_THREADS) but records
    are returned in cell order, so output is schedule-independent.
    """
    import warnings as _w

    cells = cfg.cells()
    workers = n_threads()

    def task(args):
        i, cell = args
        with _w.catch_warnings():
            _w.simplefilter("ignore")
            return run_cell(cfg, i, cell)

    if workers == 1 or len(cells) <= 1:
        records = [task(item) for item in enumerate(cells)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(task, enumerate(cells)))
    records.sort(key=lambda r: r.cell)
    return records


def records_to_csv(records: Sequence[ExperimentRecord], with_timing: bool = False) -> str:
    header = CSV_HEADER + (",wall_time" if with_timing else "")
    lines = [header] + [r.csv_row(with_timing) for r in records]
    return "\n".join(lines) + "\n"
