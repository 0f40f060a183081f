"""Probit and logit maximum likelihood."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

from .. import numerics
from ..errors import ConformabilityError, NonFinite, Separation, SingleClass
from .design import DesignMatrix

Link = Literal["probit", "logit"]
LINKS = ("probit", "logit")

# |x'b| beyond this with saturated fitted probabilities signals separation
_SEPARATION_INDEX = 30.0


@dataclass(frozen=True)
class BinaryFit:
    link: str
    names: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    covariance: np.ndarray
    log_likelihood: float
    n: int
    iterations: int = 0
    converged: bool = True

    @property
    def k(self) -> int:
        return len(self.names)

    @property
    def aic(self) -> float:
        return 2.0 * self.k - 2.0 * self.log_likelihood

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def z_values(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coefficients / self.standard_errors

    def p_values(self) -> np.ndarray:
        return 2.0 * numerics.std_normal_cdf(-np.abs(self.z_values()))

    def predict_proba(self, X: DesignMatrix) -> np.ndarray:
        if X.names != self.names:
            raise ConformabilityError(f"design columns {X.names} do not match fit {self.names}")
        return link_cdf(self.link, X.values @ self.coefficients)


def link_cdf(link: str, index):
    index = np.asarray(index, dtype=float)
    if link == "probit":
        return special.ndtr(index)
    if link == "logit":
        return special.expit(index)
    raise ValueError(f"unknown link {link!r}")


def link_pdf(link: str, index):
    """Derivative of the response probability with respect to the index."""
    index = np.asarray(index, dtype=float)
    if link == "probit":
        return numerics.std_normal_pdf(index)
    if link == "logit":
        p = special.expit(index)
        return p * (1.0 - p)
    raise ValueError(f"unknown link {link!r}")


def link_pdf_deriv(link: str, index):
    index = np.asarray(index, dtype=float)
    if link == "probit":
        return -index * numerics.std_normal_pdf(index)
    if link == "logit":
        p = special.expit(index)
        return p * (1.0 - p) * (1.0 - 2.0 * p)
    raise ValueError(f"unknown link {link!r}")


def binary_loglik(y, X: DesignMatrix, link: str):
    """Bernoulli log-likelihood objective returning ``(value, gradient)``."""
    y = np.asarray(y, dtype=float).ravel()
    Xv = X.values
    if link == "probit":
        q = 2.0 * y - 1.0

        def objective(beta):
            z = q * (Xv @ beta)
            value = float(np.sum(special.log_ndtr(z)))
            grad = Xv.T @ (q * numerics.mills_ratio(z))
            return value, grad

    elif link == "logit":

        def objective(beta):
            index = Xv @ beta
            # log(1 + e^index) without overflow
            value = float(np.sum(y * index - np.logaddexp(0.0, index)))
            grad = Xv.T @ (y - special.expit(index))
            return value, grad

    else:
        raise ValueError(f"unknown link {link!r}")
    return objective


def _start_values(y: np.ndarray, X: DesignMatrix, link: str) -> np.ndarray:
    start = np.zeros(X.k)
    if X.has_intercept:
        p = float(np.clip(y.mean(), 1e-6, 1 - 1e-6))
        j = X.names.index("const")
        start[j] = numerics.std_normal_ppf(p) if link == "probit" else float(np.log(p / (1 - p)))
    return start


def fit_binary(y, X: DesignMatrix, link: Link = "probit") -> BinaryFit:
    if link not in LINKS:
        raise ValueError(f"link must be one of {LINKS}, got {link!r}")
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.n:
        raise ConformabilityError(f"response has {y.shape[0]} rows, design has {X.n}")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("binary response must be coded 0/1")
    if y.min() == y.max():
        raise SingleClass(f"response has a single class ({int(y[0])})")
    X.check_rank()

    objective = binary_loglik(y, X, link)
    result = numerics.maximize(objective, _start_values(y, X, link))
    result, hess = numerics.newton_polish(objective, result)
    beta = result.argmax

    index = X.values @ beta
    p = link_cdf(link, index)
    saturated = (p < 1e-10) | (p > 1 - 1e-10)
    if np.any(np.abs(index) > _SEPARATION_INDEX) and np.any(saturated):
        raise Separation(
            f"fitted index reaches {np.max(np.abs(index)):.1f} with saturated probabilities; "
            "the outcome is (quasi-)perfectly predicted"
        )
    cov = numerics.covariance_from_hessian(hess)
    if not np.all(np.isfinite(cov)):
        raise NonFinite("covariance matrix is not finite")
    return BinaryFit(
        link=link,
        names=X.names,
        coefficients=beta,
        standard_errors=np.sqrt(np.clip(np.diag(cov), 0.0, None)),
        covariance=cov,
        log_likelihood=result.value,
        n=X.n,
        iterations=result.iterations,
        converged=result.converged,
    )
