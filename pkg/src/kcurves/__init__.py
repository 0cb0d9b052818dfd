"""Learning curves of kernel methods: Teacher-Student sweeps, exact lattice
errors, spectral predictors and effective dimensions."""

__version__ = "0.1.0"

from .errors import (
    BreakdownError,
    ConfigError,
    ConvergenceError,
    FitError,
    NumericalError,
    ParseError,
    PrecisionError,
)
from .fitting import ExponentFit, LearningCurve, fit_power_law, local_slopes
from .geometry import (
    PointCloud,
    Provenance,
    delta_min_curve,
    effective_dimension,
    lattice_points,
    nn_distances,
    sample_hypersphere,
    sphere_points,
)
from .grf import FieldSample, sample_field, sample_field_lattice
from .kernels import (
    Family,
    KernelSpec,
    PeriodizedKernel,
    SpectralTail,
    cross_gram,
    evaluate,
    fourier_radial,
    gram,
    spectral_exponent,
)
from .lattice import StarSumConfig, exact_lattice_mse, smoothness_index, star_sum, theorem_beta
from .regression import empirical_mse, expected_mse_closed_form, predict, solve_interpolant
from .spectral import (
    SpectralDecomposition,
    SpectralWeights,
    asymptotic_exponent_appH,
    beta_from_tail,
    kernel_pca,
    selfconsistent_curve,
    tail_power_curve,
)
from .svm import SvmModel, classify, error_rate, train_soft_margin
