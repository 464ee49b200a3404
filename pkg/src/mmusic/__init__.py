"""High-range-resolution profiling of stepped-frequency radar data with missing pulses."""

from .acf import AcfEstimate, count_pairs, estimate_acf
from .amplitude import (
    Profile,
    SteeringMatrix,
    build_steering,
    form_profile,
    least_squares_amplitudes,
)
from .baseline_omp import Dictionary, build_dictionary, omp
from .covariance import (
    CovarianceMatrix,
    choose_matrix_size,
    form_toeplitz,
    select_matrix_size,
)
from .estimators import MMusicProfiler, OMPProfiler
from .evaluation import MatchReport, match_scatterers, spurious_peak_count
from .exceptions import (
    ConditioningError,
    InsufficientDataError,
    InvalidInputError,
    MMusicError,
    NoDataError,
    NoSignalError,
    NumericError,
    SizeRuleFallbackWarning,
    UnderdeterminedError,
)
from .signal_model import (
    SPEED_OF_LIGHT,
    AvailabilityMask,
    MaskedSamples,
    RadarConfig,
    ScattererSet,
    apply_mask,
    make_block_mask,
    make_random_mask,
    synthesize,
)
from .subspace import (
    RootSet,
    SubspaceSplit,
    eigendecompose,
    estimate_order_aic,
    estimate_order_threshold,
    root_music,
    roots_to_delays,
)

__version__ = "0.1.0"

__all__ = [
    "AcfEstimate",
    "AvailabilityMask",
    "ConditioningError",
    "CovarianceMatrix",
    "Dictionary",
    "InsufficientDataError",
    "InvalidInputError",
    "MMusicError",
    "MMusicProfiler",
    "MaskedSamples",
    "MatchReport",
    "NoDataError",
    "NoSignalError",
    "NumericError",
    "OMPProfiler",
    "Profile",
    "RadarConfig",
    "RootSet",
    "SPEED_OF_LIGHT",
    "ScattererSet",
    "SizeRuleFallbackWarning",
    "SteeringMatrix",
    "SubspaceSplit",
    "UnderdeterminedError",
    "apply_mask",
    "build_dictionary",
    "build_steering",
    "choose_matrix_size",
    "count_pairs",
    "eigendecompose",
    "estimate_acf",
    "estimate_order_aic",
    "estimate_order_threshold",
    "form_profile",
    "form_toeplitz",
    "least_squares_amplitudes",
    "make_block_mask",
    "make_random_mask",
    "match_scatterers",
    "omp",
    "root_music",
    "roots_to_delays",
    "select_matrix_size",
    "spurious_peak_count",
    "synthesize",
]
