"""Word-of-mouth Kalman filter chains.

``m`` scalar Kalman filters estimate one Gaussian state; only the first sees
the raw data, each later one sees a noisy re-broadcast of its predecessor's
estimate, and the last one's posterior is the shared prior for everybody at
the next step.  This package provides:

* :mod:`womkalman.gaussian`    -- precision-form conjugate updates;
* :mod:`womkalman.cascade`     -- the exact public-precision recursion in
  four prior-handling regimes, plus closed-form rate predictions;
* :mod:`womkalman.montecarlo`  -- seeded stochastic simulation verifying the
  recursion against the realized estimation error;
* :mod:`womkalman.asymptotics` -- generic slow-growth recursion limits and
  the linear-rate fixed-point solver;
* :mod:`womkalman.ratefit`     -- log-log power-law tail estimation;
* :mod:`womkalman.cli`         -- the ``womkalman`` command-line harness.
"""

from .asymptotics import (
    LimitMethod,
    RiccatiLimit,
    RiccatiSpec,
    empirical_limit,
    fixed_point,
    linear_growth_constant,
    predict_limit,
    riccati_step,
    riccati_trajectory,
)
from .cascade import (
    CascadeConfig,
    PrecisionOverflowError,
    PrecisionState,
    RatePrediction,
    RateSource,
    Regime,
    gamma_chain,
    geometric_steps,
    increment_denominator,
    initial_state,
    leading_coefficient,
    predict_rate,
    run_trajectory,
    step,
    step_precision,
    step_precision_scaled,
    step_precision_scaled_last,
    step_precision_zeroed,
)
from .gaussian import Belief, bayes_update, kalman_gain
from .montecarlo import (
    ConsistencyReport,
    McConfig,
    PathState,
    initial_path_state,
    run_paths,
    sample_mean_bias,
    step_path,
)
from .ratefit import RateFit, default_window, fit_power_law, ratio_limit

__version__ = "0.1.0"

__all__ = [
    "Belief",
    "bayes_update",
    "kalman_gain",
    "Regime",
    "CascadeConfig",
    "PrecisionState",
    "RateSource",
    "RatePrediction",
    "PrecisionOverflowError",
    "initial_state",
    "step",
    "step_precision",
    "step_precision_scaled",
    "step_precision_zeroed",
    "step_precision_scaled_last",
    "run_trajectory",
    "gamma_chain",
    "increment_denominator",
    "leading_coefficient",
    "predict_rate",
    "geometric_steps",
    "McConfig",
    "PathState",
    "ConsistencyReport",
    "initial_path_state",
    "step_path",
    "run_paths",
    "sample_mean_bias",
    "RiccatiSpec",
    "RiccatiLimit",
    "LimitMethod",
    "riccati_step",
    "riccati_trajectory",
    "predict_limit",
    "fixed_point",
    "empirical_limit",
    "linear_growth_constant",
    "RateFit",
    "fit_power_law",
    "ratio_limit",
    "default_window",
    "__version__",
]
