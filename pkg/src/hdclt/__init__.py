"""Monte Carlo verification toolkit for Gaussian approximation of
high-dimensional scaled sums over rectangle classes.

Modules:

* :mod:`hdclt.matcore`: covariance models, Cholesky, rectangles.
* :mod:`hdclt.sampler`: seeded distribution families and scaled-sum draws.
* :mod:`hdclt.bounds`: published bound shapes and their input quantities.
* :mod:`hdclt.bootstrap`: multiplier and empirical bootstrap engines.
* :mod:`hdclt.distance`: Kolmogorov distances over rectangle sub-families.
* :mod:`hdclt.smoothing`: smoothed rectangle indicators and exact derivatives.
* :mod:`hdclt.lowerbound`: Poisson approximation and rate-curve experiments.
* :mod:`hdclt.runner`: config-driven experiments, CSV/JSON/SVG artifacts.
"""

from ._version import __version__
from .bootstrap import (MultiplierKind, empirical_cov_centered,
                        empirical_draws, multiplier_draws,
                        simultaneous_quantile)
from .bounds import (BoundInputs, BoundReport, ConstantsPolicy,
                     bound_corollary_simple, bound_gauss_bounded,
                     bound_gauss_unbounded, bound_gaussian_comparison,
                     bound_bootstrap_empirical, bound_bootstrap_multiplier,
                     bound_smooth, bound_smooth_zeroskew, bounds_local_means,
                     check_conditions)
from .distance import (MaxStatSample, anticoncentration_probe,
                       gaussian_max_cdf, ks_distance, ks_two_sample_critical,
                       rect_family_distance)
from .errors import HdcltError
from .lowerbound import (PoissonApproxRecord, poisson_approx_check,
                         rate_curve, threshold_xn, two_point_marginal_tail)
from .matcore import CovarianceModel, RectangleSpec, enlarge
from .runner import ExperimentConfig, RunManifest, emit_plot, run
from .sampler import (DataMatrix, DistributionSpec, sample,
                      sample_scaled_sums, scaled_sum, substream)
from .smoothing import (SmoothingParams, derivative_sum, h_nu, m_indicator,
                        rho_eval, rho_partial, verify_lemmas)

__all__ = [
    "__version__", "HdcltError",
    "CovarianceModel", "RectangleSpec", "enlarge",
    "DataMatrix", "DistributionSpec", "sample", "sample_scaled_sums",
    "scaled_sum", "substream",
    "BoundInputs", "BoundReport", "ConstantsPolicy",
    "bound_gauss_bounded", "bound_gauss_unbounded", "bound_corollary_simple",
    "bound_gaussian_comparison", "bound_bootstrap_multiplier",
    "bound_bootstrap_empirical", "bound_smooth", "bound_smooth_zeroskew",
    "bounds_local_means", "check_conditions",
    "MultiplierKind", "multiplier_draws", "empirical_draws",
    "empirical_cov_centered", "simultaneous_quantile",
    "MaxStatSample", "ks_distance", "ks_two_sample_critical",
    "rect_family_distance", "gaussian_max_cdf", "anticoncentration_probe",
    "SmoothingParams", "m_indicator", "rho_eval", "rho_partial",
    "derivative_sum", "h_nu", "verify_lemmas",
    "PoissonApproxRecord", "poisson_approx_check", "threshold_xn",
    "two_point_marginal_tail", "rate_curve",
    "ExperimentConfig", "RunManifest", "run", "emit_plot",
]
