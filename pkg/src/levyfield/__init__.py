"""Simulation and limit theory for Lévy-driven moving-average random fields on Z^d."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BoundaryError, CapacityError, ConfigError, CoverageError, DegenerateError, DomainError,
    LevyFieldError, UnsupportedKernelError, UnsupportedProvenanceError,
)
from .levy_basis import (  # noqa: E402
    LevyTriplet, MomentSet, characteristic_exponent, derive_moments, gaussian, poisson,
    sample_increments,
)
from .kernels import (  # noqa: E402
    Kernel, QuadratureSpec, box, evaluate, exponential, gauss, green3d, inner_product, integral,
    kernel_from_spec, lag_covariance, periodization_norm, truncate,
)
from .field_sim import FieldSample, NoiseGrid, build_noise_grid, convolve_at, simulate  # noqa: E402
from .sampling import (  # noqa: E402
    PairWeights, SamplingSet, bernoulli_set, box_set, folner_diagnostics, limit_weights,
    pair_weights, thresholded_ma_set,
)
from .estimators import AcovEstimate, sample_acov, sample_mean, spde_mu_hat  # noqa: E402
from .asymptotics import (  # noqa: E402
    AvarResult, acov_avar, acov_cov_limit, fourth_moment, mean_avar, summability_diagnostic,
)
from .streams import replicate_stream  # noqa: E402

__all__ = [
    "__version__", "BoundaryError", "CapacityError", "ConfigError", "CoverageError",
    "DegenerateError", "DomainError", "LevyFieldError", "UnsupportedKernelError",
    "UnsupportedProvenanceError", "LevyTriplet", "MomentSet", "characteristic_exponent",
    "derive_moments", "gaussian", "poisson", "sample_increments", "Kernel", "QuadratureSpec",
    "box", "evaluate", "exponential", "gauss", "green3d", "inner_product", "integral",
    "kernel_from_spec", "lag_covariance", "periodization_norm", "truncate", "FieldSample",
    "NoiseGrid", "build_noise_grid", "convolve_at", "simulate", "PairWeights", "SamplingSet",
    "bernoulli_set", "box_set", "folner_diagnostics", "limit_weights", "pair_weights",
    "thresholded_ma_set", "AcovEstimate", "sample_acov", "sample_mean", "spde_mu_hat",
    "AvarResult", "acov_avar", "acov_cov_limit", "fourth_moment", "mean_avar",
    "summability_diagnostic", "replicate_stream",
]
