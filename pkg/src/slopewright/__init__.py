"""Constant slope models for countably piecewise affine Markov interval maps."""
from __future__ import annotations

from .config import RunConfig
from .errors import InconsistencyAlarm, SlopewrightError, SpecFormatError
from .gallery import get as gallery_instance
from .graphs import find_finite_rome, find_simple_path_to_infinity
from .intervalmap import PwAffineMap
from .partition import MarkovPartition
from .perturbation import certify_finitely_generated, window_perturb
from .slopemodel import analyze, build_constant_slope_model
from .spectral import parry_eigenvector, perron_value, spectral_report
from .symbolic import TransitionMatrix

__all__ = [
    "RunConfig", "SlopewrightError", "InconsistencyAlarm", "SpecFormatError",
    "gallery_instance", "find_finite_rome", "find_simple_path_to_infinity",
    "PwAffineMap", "MarkovPartition", "certify_finitely_generated", "window_perturb",
    "analyze", "build_constant_slope_model", "parry_eigenvector", "perron_value",
    "spectral_report", "TransitionMatrix",
]
