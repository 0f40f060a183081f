"""Tobit with an observation-specific censoring threshold.

Respondents may only revise downward, so the observed posterior is
``post = min(prior, post_latent)`` with

    post_latent = gamma * prior + X delta + u,    u ~ N(0, sigma^2).

Subtracting from the prior turns this into a standard Tobit censored at
zero for ``y = prior - post`` with regressors ``(prior, X)``:

    y = max(0, (1 - gamma) * prior - X delta - u).

The fit maximizes that censored-at-zero likelihood over ``theta`` and
``s = log(sigma)`` and maps back with ``gamma = 1 - theta_prior`` and
``delta = -theta_X``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special, stats

from .. import numerics
from ..errors import AllCensored, ConformabilityError, NoCensoring, NonFinite
from .design import INTERCEPT, DesignMatrix
from .linear import fit_ols

PRIOR = "prior"


@dataclass(frozen=True)
class CensoredFit:
    """Raw censored-at-zero regression estimates on the ``(theta, log sigma)`` scale."""

    names: tuple[str, ...]
    theta: np.ndarray
    log_sigma: float
    covariance: np.ndarray
    log_likelihood: float
    n: int
    n_censored: int
    iterations: int
    converged: bool

    @property
    def sigma(self) -> float:
        return float(np.exp(self.log_sigma))

    @property
    def theta_se(self) -> np.ndarray:
        k = len(self.names)
        return np.sqrt(np.clip(np.diag(self.covariance)[:k], 0.0, None))


@dataclass(frozen=True)
class TobitFit:
    """Generalized Tobit estimates.

    ``names`` lists the regressors in parameter order, starting with
    ``prior``.  ``theta`` holds the transformed-model coefficients (the ones
    estimated on ``prior - post``); ``gamma``/``delta`` are the latent
    posterior coefficients.  ``covariance`` covers ``(gamma, delta, log
    sigma)``; since the mapping only flips signs it equals the covariance of
    ``(theta, log sigma)``.
    """

    names: tuple[str, ...]
    theta: np.ndarray
    gamma: float
    delta: dict[str, float]
    sigma: float
    covariance: np.ndarray
    log_likelihood: float
    wald_statistic: float
    wald_df: int
    n: int
    n_censored: int
    converged: bool = True
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def standard_errors(self) -> np.ndarray:
        k = len(self.names)
        return np.sqrt(np.clip(np.diag(self.covariance)[:k], 0.0, None))

    @property
    def log_sigma_se(self) -> float:
        return float(np.sqrt(max(self.covariance[-1, -1], 0.0)))

    @property
    def wald_pvalue(self) -> float:
        return float(stats.chi2.sf(self.wald_statistic, self.wald_df))

    def latent_coefficients(self) -> np.ndarray:
        """``(gamma, delta...)`` in ``names`` order."""
        return to_latent(self.theta)

    def z_values(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.theta / self.standard_errors

    def p_values(self) -> np.ndarray:
        return 2.0 * numerics.std_normal_cdf(-np.abs(self.z_values()))


def to_latent(theta) -> np.ndarray:
    """Map transformed coefficients ``(theta_prior, theta_X)`` to ``(gamma, delta)``."""
    theta = np.asarray(theta, dtype=float)
    out = -theta.copy()
    out[0] = 1.0 - theta[0]
    return out


def to_transformed(latent) -> np.ndarray:
    """Inverse of :func:`to_latent` (the map is an involution)."""
    return to_latent(latent)


def tobit_loglik(y, Z: np.ndarray):
    """Censored-at-zero log-likelihood over ``params = (theta, log sigma)``.

    Rows with ``y == 0`` contribute ``log(1 - Phi(z'theta / sigma))``; the
    rest contribute ``log phi((y - z'theta) / sigma) - log sigma``.
    """
    y = np.asarray(y, dtype=float).ravel()
    Z = np.asarray(Z, dtype=float)
    cens = y == 0.0
    Zc, Zu, yu = Z[cens], Z[~cens], y[~cens]

    def objective(params):
        theta, s = params[:-1], params[-1]
        inv_sigma = np.exp(-s)
        zc = (Zc @ theta) * inv_sigma
        r = (yu - Zu @ theta) * inv_sigma
        value = float(np.sum(special.log_ndtr(-zc)) + np.sum(numerics.std_normal_logpdf(r)) - s * r.size)
        lam = numerics.mills_ratio(-zc)
        grad_theta = inv_sigma * (Zu.T @ r - Zc.T @ lam)
        grad_s = float(np.sum(lam * zc) + np.sum(r * r) - r.size)
        return value, np.append(grad_theta, grad_s)

    return objective


def fit_censored(y, Z: DesignMatrix, require_censoring: bool = True) -> CensoredFit:
    """Standard Tobit censored from below at zero."""
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != Z.n:
        raise ConformabilityError(f"response has {y.shape[0]} rows, design has {Z.n}")
    if np.any(y < 0):
        raise ValueError("censored response must be non-negative")
    n_cens = int(np.sum(y == 0.0))
    if require_censoring and n_cens == 0:
        raise NoCensoring("no censored observations; use OLS instead")
    if n_cens == y.size:
        raise AllCensored("every observation is censored; the likelihood has no interior maximum")
    Z.check_rank()

    ols = fit_ols(y, Z)
    start = np.append(ols.coefficients, np.log(max(ols.sigma_mle, 1e-8 * max(1.0, float(np.std(y))))))
    objective = tobit_loglik(y, Z.values)
    result = numerics.maximize(objective, start)
    result, hess = numerics.newton_polish(objective, result)
    cov = numerics.covariance_from_hessian(hess)
    if not np.all(np.isfinite(cov)):
        raise NonFinite("covariance matrix is not finite")
    k = Z.k
    return CensoredFit(
        names=Z.names,
        theta=result.argmax[:k].copy(),
        log_sigma=float(result.argmax[k]),
        covariance=cov,
        log_likelihood=result.value,
        n=Z.n,
        n_censored=n_cens,
        iterations=result.iterations,
        converged=result.converged,
    )


def fit_tobit_generalized(prior, post, X: DesignMatrix) -> TobitFit:
    """Fit the latent-posterior Tobit with the prior as censoring threshold.

    ``X`` holds the covariates other than the prior (normally with an
    intercept column).  Raises :class:`NoCensoring` when nobody kept the
    prior and :class:`AllCensored` when nobody updated.
    """
    prior = np.asarray(prior, dtype=float).ravel()
    post = np.asarray(post, dtype=float).ravel()
    if prior.shape != post.shape or prior.shape[0] != X.n:
        raise ConformabilityError("prior, post and X must have the same number of rows")
    if np.any(post > prior):
        bad = int(np.argmax(post > prior))
        raise ValueError(f"post exceeds prior at row {bad}; only downward revisions are modeled")
    y = prior - post
    Z = X.prepend(PRIOR, prior)
    raw = fit_censored(y, Z, require_censoring=True)
    return _from_censored(raw)


def _from_censored(raw: CensoredFit) -> TobitFit:
    names = raw.names
    latent = to_latent(raw.theta)
    slopes = [i for i, name in enumerate(names) if name != INTERCEPT]
    b = raw.theta[slopes]
    V = raw.covariance[np.ix_(slopes, slopes)]
    try:
        wald = float(b @ np.linalg.solve(V, b))
    except np.linalg.LinAlgError:
        wald = float(b @ np.linalg.pinv(V) @ b)
    return TobitFit(
        names=names,
        theta=raw.theta,
        gamma=float(latent[0]),
        delta={name: float(v) for name, v in zip(names[1:], latent[1:])},
        sigma=raw.sigma,
        covariance=raw.covariance,
        log_likelihood=raw.log_likelihood,
        wald_statistic=wald,
        wald_df=len(slopes),
        n=raw.n,
        n_censored=raw.n_censored,
        converged=raw.converged,
        iterations=raw.iterations,
    )


# ---------------------------------------------------------------------------
# Interpretation
# ---------------------------------------------------------------------------


class Skepticism(str, Enum):
    SKEPTICAL = "Skeptical"
    UPDATER = "Updater"
    INDETERMINATE = "Indeterminate"


AGAINST_UPDATE = "raises latent posterior (against update)"
TOWARD_UPDATE = "lowers latent posterior (toward update)"
NO_EFFECT = "no effect"


@dataclass(frozen=True)
class SkepticismReading:
    verdict: Skepticism
    gamma: float
    directions: dict[str, str]


def classify_gamma(gamma: float, precision: int = 3) -> Skepticism:
    """gamma > 1: skeptical; gamma < 1: updater; equal at ``precision`` decimals: indeterminate."""
    if round(gamma, precision) == 1.0:
        return Skepticism.INDETERMINATE
    return Skepticism.SKEPTICAL if gamma > 1.0 else Skepticism.UPDATER


def classify_skepticism(fit: TobitFit, precision: int = 3) -> SkepticismReading:
    directions = {}
    for name, d in fit.delta.items():
        if name == INTERCEPT:
            continue
        if d > 0:
            directions[name] = AGAINST_UPDATE
        elif d < 0:
            directions[name] = TOWARD_UPDATE
        else:
            directions[name] = NO_EFFECT
    return SkepticismReading(classify_gamma(fit.gamma, precision), fit.gamma, directions)
