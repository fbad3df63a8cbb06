"""Simulation and verification toolkit for integral functionals
I_T = int_0^T f(X_t)**2 dt: exact samplers for six process families,
small-ball probability estimates with derived constants, divergence-rate
and ergodic experiments, drift estimators, and quadrature oracles behind
every derived number.
"""

__version__ = "0.1.0"

from .estimators import (
    FracModelConfig,
    OuModelConfig,
    frac_drift_estimator,
    frac_estimator_sweep,
    ou_drift_estimator,
    ou_estimator_sweep,
    simulate_ou_model,
)
from .functionals import (
    divergence_experiment,
    dyadic_horizons,
    ergodic_limit,
    fit_divergence_rate,
    integral_functional,
    selfsimilar_lowerbound_experiment,
)
from .kernels import (
    ProcessKind,
    ProcessSpec,
    XiLaw,
    covariance,
    covariance_matrix,
    fou_variance,
    variogram,
)
from .probability import (
    SmallBallParams,
    default_small_ball_params,
    derive_small_ball_params,
    empirical_small_ball,
    holder_tail,
    li_shao_bound,
    small_ball_grid,
)
from .quadrature import (
    QuadratureResult,
    gamma_function,
    shifted_exp_kernel_integral,
    singular_kernel_integral,
    small_window_kernel_limit,
)
from .simulate import SamplePath, sample_path, sample_values
from .testfuncs import (
    BUILTIN_FUNCTIONS,
    FunctionKind,
    FunctionSpec,
    builtin_function,
    check_floor_power_bound,
)

__all__ = [
    "__version__",
    "ProcessKind",
    "ProcessSpec",
    "XiLaw",
    "covariance",
    "covariance_matrix",
    "variogram",
    "fou_variance",
    "QuadratureResult",
    "gamma_function",
    "singular_kernel_integral",
    "shifted_exp_kernel_integral",
    "small_window_kernel_limit",
    "SamplePath",
    "sample_path",
    "sample_values",
    "FunctionKind",
    "FunctionSpec",
    "BUILTIN_FUNCTIONS",
    "builtin_function",
    "check_floor_power_bound",
    "SmallBallParams",
    "derive_small_ball_params",
    "default_small_ball_params",
    "empirical_small_ball",
    "small_ball_grid",
    "li_shao_bound",
    "holder_tail",
    "dyadic_horizons",
    "integral_functional",
    "fit_divergence_rate",
    "divergence_experiment",
    "selfsimilar_lowerbound_experiment",
    "ergodic_limit",
    "OuModelConfig",
    "FracModelConfig",
    "simulate_ou_model",
    "ou_drift_estimator",
    "ou_estimator_sweep",
    "frac_drift_estimator",
    "frac_estimator_sweep",
]
