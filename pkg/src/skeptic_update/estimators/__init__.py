from .binary import BinaryFit, binary_loglik, fit_binary, link_cdf, link_pdf
from .design import INTERCEPT, DesignMatrix, intercept_only
from .hurdle import HurdleFit, fit_hurdle, hurdle_expectation, hurdle_expectations
from .linear import LinearFit, fit_ols, ols_profile_loglik
from .margins import MarginalEffects, average_probability, marginal_effects
from .prediction import PredictionReport, predict_change
from .tobit import (
    CensoredFit,
    Skepticism,
    SkepticismReading,
    TobitFit,
    classify_gamma,
    classify_skepticism,
    fit_censored,
    fit_tobit_generalized,
    to_latent,
    to_transformed,
    tobit_loglik,
)

__all__ = [
    "BinaryFit",
    "CensoredFit",
    "DesignMatrix",
    "HurdleFit",
    "INTERCEPT",
    "LinearFit",
    "MarginalEffects",
    "PredictionReport",
    "Skepticism",
    "SkepticismReading",
    "TobitFit",
    "average_probability",
    "binary_loglik",
    "classify_gamma",
    "classify_skepticism",
    "fit_binary",
    "fit_censored",
    "fit_hurdle",
    "fit_ols",
    "fit_tobit_generalized",
    "hurdle_expectation",
    "hurdle_expectations",
    "intercept_only",
    "link_cdf",
    "link_pdf",
    "marginal_effects",
    "ols_profile_loglik",
    "predict_change",
    "to_latent",
    "to_transformed",
    "tobit_loglik",
]
