"""Ordinary least squares with classical standard errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..errors import InsufficientObservations
from .design import DesignMatrix


@dataclass(frozen=True)
class LinearFit:
    names: tuple[str, ...]
    coefficients: np.ndarray
    standard_errors: np.ndarray
    covariance: np.ndarray
    residual_std_error: float
    r_squared: float
    adj_r_squared: float
    f_statistic: float
    f_df: tuple[int, int]
    n: int
    residuals: np.ndarray

    @property
    def df_resid(self) -> int:
        return self.n - len(self.names)

    @property
    def sigma_mle(self) -> float:
        """Residual standard deviation with denominator n."""
        return float(np.sqrt(np.sum(self.residuals**2) / self.n))

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def t_values(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.coefficients / self.standard_errors

    def p_values(self) -> np.ndarray:
        return 2.0 * stats.t.sf(np.abs(self.t_values()), self.df_resid)

    def f_pvalue(self) -> float:
        d1, d2 = self.f_df
        if d1 == 0 or not np.isfinite(self.f_statistic):
            return float("nan")
        return float(stats.f.sf(self.f_statistic, d1, d2))

    def predict(self, X: DesignMatrix) -> np.ndarray:
        return X.values @ self.coefficients


def fit_ols(y, X: DesignMatrix) -> LinearFit:
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != X.n:
        raise InsufficientObservations(f"response has {y.shape[0]} rows, design has {X.n}")
    if X.n <= X.k:
        raise InsufficientObservations(f"need n > k, got n={X.n}, k={X.k}")
    X.check_rank()

    beta, *_ = np.linalg.lstsq(X.values, y, rcond=None)
    resid = y - X.values @ beta
    n, k = X.n, X.k
    ssr = float(resid @ resid)
    s2 = ssr / (n - k)
    xtx_inv = np.linalg.inv(X.values.T @ X.values)
    cov = s2 * xtx_inv
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    centered = X.has_intercept
    tss = float(np.sum((y - y.mean()) ** 2)) if centered else float(y @ y)
    r2 = 1.0 - ssr / tss if tss > 0 else 1.0
    df_model = k - 1 if centered else k
    adj = 1.0 - (1.0 - r2) * (n - int(centered)) / (n - k)
    if df_model > 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            fstat = float(((tss - ssr) / df_model) / s2) if s2 > 0 else float("inf")
    else:
        fstat = float("nan")
    return LinearFit(
        names=X.names,
        coefficients=beta,
        standard_errors=se,
        covariance=cov,
        residual_std_error=float(np.sqrt(s2)),
        r_squared=r2,
        adj_r_squared=adj,
        f_statistic=fstat,
        f_df=(df_model, n - k),
        n=n,
        residuals=resid,
    )


def ols_profile_loglik(y, X: DesignMatrix):
    """Gaussian log-likelihood of the coefficients with sigma^2 concentrated out."""
    y = np.asarray(y, dtype=float).ravel()
    Xv = X.values
    n = y.shape[0]

    def objective(beta):
        resid = y - Xv @ beta
        ssr = float(resid @ resid)
        value = -0.5 * n * (np.log(2.0 * np.pi * ssr / n) + 1.0)
        grad = (n / ssr) * (Xv.T @ resid)
        return value, grad

    return objective
