"""LRU caching under shot-noise traffic: Che's approximation, its error bounds, and simulation."""
from .analytics import (
    CheCurvePoint,
    che_curve_point,
    che_error_bound,
    eviction_time_che,
    expected_distinct_g,
    hit_prob_che,
)
from .errors import ConfigError, DegenerateInputError, ModelError, NumericsError, SnmError
from .model import DeterministicVolume, ParetoVolume, RectangularProfile, SnmModel, TabulatedProfile, study_model
from .numerics import DEFAULT_NUMERICS, NumericsConfig

__version__ = "0.1.0"
