"""Small-noise linear diffusions conditioned to cross a potential wall.

Exact samplers, closed-form limit laws and Monte Carlo convergence studies
for the exit time of ``dX = lam X dt + eps dW`` conditioned on leaving an
interval through its far end, and for the exit location of a linear saddle.
"""
__version__ = "0.1.0"

from .analytic import (LimitLaw, complex_log_gamma, conditional_tau0_cdf, convolution_residual,
                       duplication_residual, gaussian_quantile, gaussian_tail, gumbel_law,
                       hit_probability, limit_cdf, limit_cf, limit_law_for, limit_quantile,
                       th3_sup_distance)
from .model import NEVER, BrownianClock, PathOutcome, WallModel1D, drift_1d, inverse_time_change, path_position, time_change
from .pathsim import (BudgetExceeded, EquivalenceEstimate, GridSpec, NoConditioningEvents,
                      StepSizeError, check_ito_isometry_identity, doob_conditioned_drift,
                      estimate_equivalence_ratio, htransform_exit_times, q_statistic,
                      rejection_exit_times, sample_exit_conditioned_htransform,
                      sample_exit_conditioned_rejection, simulate_path, simulate_paths)
from .rng import make_rng
from .saddle import (SaddleModel2D, beta_exponent, conditional_cf_check, rescaled_exit_sample,
                     saddle_limit_law, sample_saddle_exit_conditioned)
from .samplers import sample_gaussian_tail, sample_limit, sample_R, sample_tau0_given_hit
from .stats import EmpiricalSample, dkw_bound, ks_one_sample, ks_two_sample

__all__ = [
    "BrownianClock", "BudgetExceeded", "EmpiricalSample", "EquivalenceEstimate", "GridSpec",
    "LimitLaw", "NEVER", "NoConditioningEvents", "PathOutcome", "SaddleModel2D", "StepSizeError",
    "WallModel1D", "beta_exponent", "check_ito_isometry_identity", "complex_log_gamma",
    "conditional_cf_check", "conditional_tau0_cdf", "convolution_residual", "dkw_bound",
    "doob_conditioned_drift", "drift_1d", "duplication_residual", "estimate_equivalence_ratio",
    "gaussian_quantile", "gaussian_tail", "gumbel_law", "hit_probability", "htransform_exit_times",
    "inverse_time_change", "ks_one_sample", "ks_two_sample", "limit_cdf", "limit_cf",
    "limit_law_for", "limit_quantile", "make_rng", "path_position", "q_statistic",
    "rejection_exit_times", "rescaled_exit_sample", "saddle_limit_law",
    "sample_exit_conditioned_htransform", "sample_exit_conditioned_rejection", "sample_gaussian_tail",
    "sample_limit", "sample_R", "sample_saddle_exit_conditioned", "sample_tau0_given_hit",
    "simulate_path", "simulate_paths", "th3_sup_distance", "time_change",
]
