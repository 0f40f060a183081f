"""Bayesian belief updating and skepticism estimators for survey data."""

from . import belief, dataio, estimators, numerics, simulate
from .errors import MaxIterationsWarning, SkepticUpdateError

__version__ = "0.1.0"

__all__ = ["MaxIterationsWarning", "SkepticUpdateError", "belief", "dataio", "estimators", "numerics", "simulate"]
