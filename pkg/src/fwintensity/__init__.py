"""Sparse additive log-intensity estimation for counting processes.

Fits log-intensities of the form exp{F(X(t))} by exact likelihood
maximization over a weighted-l1 ball of dictionary atoms using the
Frank-Wolfe algorithm, with simulation, model selection, self-exciting
extensions, and out-of-sample forecast evaluation.
"""

from .backend import BACKEND
from .dictionary import DictionaryConfig, select_atom
from .errors import FwIntensityError
from .fw import FitConfig, duality_gap, fit, line_search_rho
from .likelihood import AdditiveModel, log_likelihood, predict_intensity, signed_sample
from .timeline import (
    EventTimeline,
    PreprocessTransform,
    build_timeline,
    covariate_at,
    empirical_l2_weight,
    read_timeline,
    window,
    winsorize_standardize,
)

__version__ = "0.1.0"

__all__ = [
    "AdditiveModel",
    "BACKEND",
    "DictionaryConfig",
    "EventTimeline",
    "FitConfig",
    "FwIntensityError",
    "PreprocessTransform",
    "build_timeline",
    "covariate_at",
    "duality_gap",
    "empirical_l2_weight",
    "fit",
    "line_search_rho",
    "log_likelihood",
    "predict_intensity",
    "read_timeline",
    "select_atom",
    "signed_sample",
    "window",
    "winsorize_standardize",
]
