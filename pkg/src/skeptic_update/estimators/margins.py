"""Average marginal effects for binary-choice fits, with delta-method errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import numerics
from ..errors import ConformabilityError
from .binary import BinaryFit, link_cdf, link_pdf, link_pdf_deriv
from .design import DesignMatrix


@dataclass(frozen=True)
class MarginalEffects:
    names: tuple[str, ...]
    effects: np.ndarray
    standard_errors: np.ndarray
    discrete: tuple[bool, ...]
    mean_density: float
    jacobian: np.ndarray

    def effect(self, name: str) -> float:
        return float(self.effects[self.names.index(name)])

    def z_values(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.effects / self.standard_errors

    def p_values(self) -> np.ndarray:
        return 2.0 * numerics.std_normal_cdf(-np.abs(self.z_values()))


def _is_dummy(column: np.ndarray) -> bool:
    values = np.unique(column)
    return values.size == 2 and values[0] == 0.0 and values[1] == 1.0


def marginal_effects(fit: BinaryFit, X: DesignMatrix, discrete: dict[str, bool] | None = None) -> MarginalEffects:
    """Average marginal effect of every column of ``X``.

    Columns taking only the values 0 and 1 get the average discrete change
    in fitted probability from 0 to 1; every other column (the intercept
    included) gets the average derivative ``mean(g(x'b)) * b_k``.  Pass
    ``discrete`` to override the automatic detection.
    """
    if X.names != fit.names:
        raise ConformabilityError(f"design columns {X.names} do not match fit {fit.names}")
    beta = fit.coefficients
    Xv = X.values
    n, k = Xv.shape
    index = Xv @ beta
    g = link_pdf(fit.link, index)
    gp = link_pdf_deriv(fit.link, index)
    mean_g = float(np.mean(g))

    effects = np.empty(k)
    jac = np.empty((k, k))
    flags = []
    for j, name in enumerate(X.names):
        is_discrete = discrete.get(name) if discrete and name in discrete else (name != "const" and _is_dummy(Xv[:, j]))
        flags.append(bool(is_discrete))
        if is_discrete:
            X1 = Xv.copy()
            X0 = Xv.copy()
            X1[:, j] = 1.0
            X0[:, j] = 0.0
            i1, i0 = X1 @ beta, X0 @ beta
            effects[j] = float(np.mean(link_cdf(fit.link, i1) - link_cdf(fit.link, i0)))
            g1, g0 = link_pdf(fit.link, i1), link_pdf(fit.link, i0)
            jac[j] = (X1.T @ g1 - X0.T @ g0) / n
        else:
            effects[j] = mean_g * beta[j]
            jac[j] = beta[j] * (Xv.T @ gp) / n
            jac[j, j] += mean_g
    cov = jac @ fit.covariance @ jac.T
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return MarginalEffects(
        names=X.names,
        effects=effects,
        standard_errors=se,
        discrete=tuple(flags),
        mean_density=mean_g,
        jacobian=jac,
    )


def average_probability(fit: BinaryFit, X: DesignMatrix, beta=None) -> float:
    beta = fit.coefficients if beta is None else np.asarray(beta, dtype=float)
    return float(np.mean(link_cdf(fit.link, X.values @ beta)))
