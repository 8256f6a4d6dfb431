"""CSV and config-file formats shared by the library and the CLI.

Matrices and samples: row-major comma-separated values with '.' decimals
and an optional single header line.  Discrete distributions: two columns
(value, prob).  Experiment configs: 'key = value' lines with '#' comments.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError
from .scalars import DiscreteDistribution
from .simulate import (
    ContaminationSpec,
    DistributionSpec,
    EstimatorOptions,
    ExperimentConfig,
)


def _parse_float_row(line: str) -> Optional[List[float]]:
    try:
        return [float(tok) for tok in line.split(",")]
    except ValueError:
        return None


def _load_rows(path) -> np.ndarray:
    text = Path(path).read_text()
    rows: List[List[float]] = []
    width = None
    for i, raw in enumerate(text.splitlines()):
        line = raw.strip()
        if not line:
            continue
        vals = _parse_float_row(line)
        if vals is None:
            if i == 0 and not rows:  # single optional header line
                continue
            raise InvalidInputError(f"{path}: unparseable line {i + 1}: {raw!r}")
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise InvalidInputError(f"{path}: ragged row at line {i + 1}")
        rows.append(vals)
    if not rows:
        raise InvalidInputError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def load_sample(path) -> np.ndarray:
    return _load_rows(path)


def load_matrix(path) -> np.ndarray:
    M = _load_rows(path)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{path}: expected a square matrix, got {M.shape}")
    return M


def format_rows(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "\n".join(",".join(repr(x) for x in row) for row in M) + "\n"


def save_matrix(path, M) -> None:
    Path(path).write_text(format_rows(M))


save_sample = save_matrix


def load_distribution(path) -> DiscreteDistribution:
    M = _load_rows(path)
    if M.shape[1] != 2:
        raise InvalidInputError(f"{path}: expected two columns (value, prob)")
    return DiscreteDistribution(M[:, 0], M[:, 1])


def save_distribution(path, dist: DiscreteDistribution) -> None:
    save_matrix(path, np.column_stack([dist.values, dist.probs]))


# ---------------------------------------------------------------------------
# experiment config files


def _parse_kv(text: str) -> dict:
    out = {}
    for i, raw in enumerate(text.splitlines()):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"config line {i + 1} is not 'key = value': {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip().lower()] = val.strip()
    return out


def _parse_sigma(token: str, dim: int, base: Path) -> np.ndarray:
    token = token.strip()
    if token == "identity":
        return np.eye(dim)
    if token.startswith("diag:"):
        vals = [float(t) for t in token[len("diag:"):].split(",")]
        return np.diag(vals)
    if token.startswith("file:"):
        return load_matrix(base / token[len("file:"):])
    raise InvalidParameterError(f"unknown sigma spec {token!r}")


def _parse_distribution(token: str, sigma: np.ndarray) -> DistributionSpec:
    parts = token.strip().split(":")
    kind = parts[0]
    if kind in ("gaussian", "custom_psd"):
        return DistributionSpec(kind, sigma=sigma)
    if kind == "elliptical_t":
        return DistributionSpec(kind, sigma=sigma, nu=float(parts[1]))
    if kind == "fourpoint":
        eta_p = float(parts[1]) if len(parts) > 1 else 0.04
        s_sq = float(parts[2]) if len(parts) > 2 else 1.0
        return DistributionSpec(kind, eta_param=eta_p, sigma_sq=s_sq)
    raise InvalidParameterError(f"unknown distribution {token!r}")


def _parse_adversary(token: str, dim: int) -> ContaminationSpec:
    parts = token.strip().split(":")
    kind = parts[0]
    if kind == "none" or kind == "quantile_replace":
        return ContaminationSpec(kind)
    if kind == "fixed_outlier":
        mag = float(parts[1]) if len(parts) > 1 else 100.0
        axis = int(parts[2]) if len(parts) > 2 else 0
        return ContaminationSpec(kind, magnitude=mag, direction=np.eye(dim)[axis])
    if kind == "variance_inflation":
        return ContaminationSpec(kind, factor=float(parts[1]) if len(parts) > 1 else 10.0)
    raise InvalidParameterError(f"unknown adversary {token!r}")


def _split_list(val: str) -> List[str]:
    return [t.strip() for t in val.split(",") if t.strip()]


def parse_experiment_config(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read the documented 'key = value' schema (see README) into a config."""
    base = Path(path).parent
    kv = _parse_kv(Path(path).read_text())
    if overrides:
        kv.update({k.lower(): str(v) for k, v in overrides.items() if v is not None})

    dim = int(kv.get("dim", "5"))
    sigma = _parse_sigma(kv.get("sigma", "identity"), dim, base)
    dists = [_parse_distribution(t, sigma) for t in _split_list(kv.get("distributions", "gaussian"))]
    advs = [_parse_adversary(t, dim) for t in _split_list(kv.get("adversaries", "none"))]
    n_values = [int(t) for t in _split_list(kv.get("n", "300"))]
    eta_values = [float(t) for t in _split_list(kv.get("eta", "0.0"))]

    opt_fields = {}
    for name, cast in (
        ("kappa_mode", str), ("kappa4", float), ("scale_mode", str), ("p", float),
        ("c_gamma", float), ("c_catoni", float), ("budget", int),
        ("refine_steps", int), ("refine_top", int), ("outer_steps", int),
        ("inner_steps", int), ("tolerance", float),
    ):
        if name in kv:
            opt_fields[name] = cast(kv[name])
    options = EstimatorOptions(**opt_fields)

    estimators = _split_list(kv.get("estimators", "sample_cov,p4"))
    cfg = ExperimentConfig(
        distributions=dists,
        adversaries=advs,
        n_values=n_values,
        eta_values=eta_values,
        delta=float(kv.get("delta", "0.1")),
        trials=int(kv.get("trials", "10")),
        estimators=estimators,
        seed=int(kv.get("seed", "0")),
        output=kv.get("output", "records.csv"),
        options=options,
    )
    if not 0.0 < cfg.delta < 1.0:
        raise InvalidParameterError("delta must lie in (0, 1)")
    if cfg.trials < 1 or any(n < 1 for n in cfg.n_values):
        raise InvalidParameterError("trials and N values must be positive")
    if any(not 0.0 <= e <= 1.0 for e in cfg.eta_values):
        raise InvalidParameterError("eta values must lie in [0, 1]")
    if math.isnan(cfg.delta):
        raise InvalidParameterError("delta is NaN")
    return cfg
