"""Band-limited wavelet density deconvolution.

Estimates an unknown density f from i.i.d. observations Y = X + eps with
a known error law, using Meyer-wavelet deconvolution: linear and
hard-thresholded estimators, regime-aware resolution selection,
Rademacher-calibrated confidence bands, and a Monte Carlo harness for
sup-norm risk and coverage experiments.
"""

__version__ = "0.1.0"

from .atoms import DeconvAtoms, build_atoms, build_eta, kernel_kstar
from .confidence import BandResult, RademacherStat, build_band, rademacher_sup, sigma_r
from .error_models import (
    DecayClass,
    ErrorModel,
    Regime,
    cauchy,
    char_fn,
    custom,
    delta_j,
    dirac,
    gaussian,
    laplace,
    sample_noise,
)
from .estimators import (
    CoefficientSet,
    LinearEstimate,
    ResolutionRule,
    ThresholdConfig,
    ThresholdEstimate,
    empirical_beta,
    estimate_G,
    linear_estimate,
    project_density,
    select_resolution,
    threshold_estimate,
    threshold_value,
)
from .exceptions import (
    CapabilityError,
    ConfigurationError,
    ConstraintError,
    IllPosednessError,
    InsufficiencyError,
    MeyerDeconvError,
    NormalizationError,
    ParseError,
    TabulationRangeError,
)
from .grids import (
    GridFunction,
    UniformGrid,
    convolve_density,
    forward_ft,
    inverse_ft,
)
from .meyer import (
    BesovSpec,
    MeyerBasis,
    besov_norm,
    build_meyer,
    eval_phi,
    eval_psi,
    summability_constants,
)
from .simulate import (
    BandConfig,
    CoverageReport,
    EstimatorConfig,
    RiskReport,
    TestDensity,
    bias_check,
    coverage_experiment,
    gaussian_density,
    gaussian_mixture,
    lower_bound_family,
    rate_fit,
    sample_xy,
    scaled_cauchy,
    sup_norm_risk,
    uniform_sum,
)

__all__ = [name for name in dir() if not name.startswith("_")]
