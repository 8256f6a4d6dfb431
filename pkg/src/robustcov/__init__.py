"""Dimension-free robust covariance estimation for heavy-tailed,
adversarially corrupted data."""

from .covp4 import (
    FitParams,
    FitResult,
    P4Config,
    P4Result,
    ScaleInfo,
    estimate_cov_p4,
    fit_minmax_psd,
    fit_targets_psd,
    gamma_radius,
    lambda_p4,
)
from .covpgt4 import (
    GammaFitResult,
    Pgt4Config,
    Pgt4Result,
    QuantileOracle,
    directional_quantile,
    epsilon_pgt4,
    estimate_cov_pgt4,
    fit_gamma_Q,
    q_grid_auto,
)
from .diagnostics import f_stat_bruteforce, f_stat_greedy, peaky_spread_decompose
from .directions import (
    DirectionSet,
    default_budget,
    max_residual,
    seed_directions,
    sup_truncated_mass,
)
from .errors import (
    DegenerateSampleError,
    FeasibilityError,
    InvalidInputError,
    InvalidParameterError,
    RobustCovError,
)
from .linalg import effective_rank, op_norm, psd_project, sample_covariance
from .opnorm import (
    DirectionParams,
    OpNormConfig,
    build_phi_directions,
    estimate_opnorm,
    phi,
    solve_alpha_hat,
)
from .scalars import (
    DiscreteDistribution,
    epsilon_lower_bound,
    estimate_trace,
    fourpoint_epsilon_reference,
    fourpoint_y1,
    fourpoint_y2,
    quantile_Q,
    trimmed_mean,
)
from .simulate import (
    ContaminationSpec,
    DistributionSpec,
    EstimatorOptions,
    ExperimentConfig,
    ExperimentRecord,
    contaminate,
    gaussian_kappa,
    run_experiment,
    sample_elliptical_t,
    sample_fourpoint,
    sample_gaussian,
)
from .truncation import (
    clamp_interval,
    norm_truncate,
    norm_truncation_radius,
    one_sided_process,
    psi,
    psi_band,
    truncated_process,
)

__version__ = "0.1.0"
