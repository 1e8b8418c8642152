"""Semiparametric time series driven by latent factor processes.

The library covers the full pipeline for three response families
(non-negative with power variance, real-valued, bounded):

* latent process simulation (Gaussian AR(1), shifted gamma AR(1)) and
  conditional response generation (:mod:`latentsts.latent`);
* closed-form marginal moments (:mod:`latentsts.moments`);
* quasi-likelihood estimation of regression coefficients by Fisher scoring
  (:mod:`latentsts.qlfit`);
* method-of-moments estimation of dispersion and latent parameters
  (:mod:`latentsts.mmest`);
* Monte Carlo studies and parametric Monte Carlo standard errors
  (:mod:`latentsts.mc`);
* CSV/JSON I/O and a command-line interface (:mod:`latentsts.cli`).
"""

from ._version import __version__
from ._kernels import IMPLEMENTATION as kernel_implementation
from .errors import (
    ConfigError,
    DataError,
    DomainError,
    FitConvergenceError,
    LatentSTSError,
    RankError,
    SpecificationError,
    StudyError,
)
from .families import (
    BOUNDED,
    NONNEGATIVE,
    REAL_VALUED,
    CovariateTerm,
    DesignMatrix,
    ModelFamily,
    ParameterSet,
    abs_break,
    build_design,
    cosine,
    intercept,
    linear_trend,
    link,
    link_inverse,
    q_function,
    quadratic_trend,
    sine,
    variance_function,
)
from .latent import (
    CONDITIONALS,
    LatentPath,
    LatentSpec,
    gar1_shift,
    gaussian_intercept,
    generate_response,
    shift_gar1,
    simulate_gar1,
    simulate_gaussian_ar1,
    simulate_latent,
)
from .moments import (
    MomentReport,
    autocorrelation,
    autocovariance,
    gar_factor_product_moment,
    gar_factor_second_moment,
    marginal_mean,
    marginal_variance,
    moment_report,
)
from .qlfit import FitResult, fit_beta, fisher_information, quasi_loglik, quasi_score
from .mmest import (
    NuisanceEstimate,
    estimate_nuisance,
    invert_product_moment,
    mm_bounded,
    mm_nonneg,
    mm_real,
    solve_latent_moments,
)
from .mc import (
    DiagnosticsReport,
    StudyConfig,
    StudyResult,
    mc_standard_errors,
    run_study,
    standardized_diagnostics,
)
from .dataio import DataSet, load_csv

__all__ = [
    "__version__",
    "kernel_implementation",
    # errors
    "LatentSTSError", "DomainError", "SpecificationError", "RankError",
    "FitConvergenceError", "StudyError", "ConfigError", "DataError",
    # families
    "NONNEGATIVE", "REAL_VALUED", "BOUNDED",
    "ModelFamily", "ParameterSet", "CovariateTerm", "DesignMatrix",
    "intercept", "linear_trend", "quadratic_trend", "cosine", "sine",
    "abs_break", "build_design",
    "link", "link_inverse", "variance_function", "q_function",
    # latent
    "CONDITIONALS", "LatentSpec", "LatentPath", "gaussian_intercept",
    "gar1_shift", "simulate_gaussian_ar1", "simulate_gar1", "shift_gar1",
    "simulate_latent", "generate_response",
    # moments
    "MomentReport", "moment_report", "marginal_mean", "marginal_variance",
    "autocovariance", "autocorrelation",
    "gar_factor_second_moment", "gar_factor_product_moment",
    # fitting
    "FitResult", "fit_beta", "quasi_score", "quasi_loglik", "fisher_information",
    # method of moments
    "NuisanceEstimate", "mm_nonneg", "mm_real", "mm_bounded",
    "estimate_nuisance", "invert_product_moment", "solve_latent_moments",
    # Monte Carlo
    "StudyConfig", "StudyResult", "DiagnosticsReport",
    "run_study", "mc_standard_errors", "standardized_diagnostics",
    # I/O
    "DataSet", "load_csv",
]
