"""Exact and big-float experiments on a piecewise affine blender-horseshoe model."""

__version__ = "0.1.0"

from .errors import (DependencyError, DivergenceError, DomainError, EscapeError,
                     ExactnessError, InsufficientDataError, PreconditionError, RegionError,
                     ScheduleError, SeedError, WildBlenderError)
from .model import ModelParams, reference_params, validate_params
from .numerics import BigFloat, RatInterval, as_rat
