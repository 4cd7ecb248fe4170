"""Kernel ridge regression with uniform error bounds for non-Gaussian noise."""

__version__ = "0.1.0"

from .bounds import (  # noqa: E402
    BoundConfig, BoundEvaluation, GridRule, TableParams, TimeMode, covering_upper_bound,
    heavy_tailed_bound, moment_transfer, noise_bound_conditional, noise_bound_correlated,
    noise_bound_nonuniform, noise_bound_uniform, solve_zeta_for_delta, solve_zeta_weighted,
    table_params, truncation_schedule,
)
from .domain import DomainBox  # noqa: E402
from .errors import ConfigurationError, InputError, NumericalError  # noqa: E402
from .kernels import KernelSpec, default_hoelder, gram  # noqa: E402
from .regressor import QueryDecomposition, RegressorState, append, extend, fit, query, truncated_mean  # noqa: E402
