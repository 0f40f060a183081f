"""Two-tier hurdle model: a binary change decision, then the revised level.

Stage one fits ``P(change = 1) = F(gamma * prior + X delta)`` on the whole
sample.  Stage two regresses ``G(post)`` on ``prior`` and its own covariates
by OLS over the respondents who changed.  With ``G = log`` the level is
log-normal, giving closed-form conditional and unconditional means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np
import pandas as pd

from ..errors import EmptyUpdaterSubsample, MissingCovariates, TransformMismatch
from .binary import BinaryFit, Link, fit_binary, link_cdf
from .design import DesignMatrix
from .linear import LinearFit, fit_ols

Transform = Literal["log", "identity"]
TRANSFORMS = ("log", "identity")


@dataclass(frozen=True)
class HurdleFit:
    change_stage: BinaryFit
    level_stage: LinearFit
    transform: str
    change_covariates: tuple[str, ...]
    level_covariates: tuple[str, ...]

    @property
    def sigma(self) -> float:
        return self.level_stage.residual_std_error


def _with_prior(covariates: Sequence[str]) -> list[str]:
    return ["prior"] + [c for c in covariates if c != "prior"]


def _usable(frame: pd.DataFrame, columns: Sequence[str]) -> pd.DataFrame:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise MissingCovariates(f"covariates not in data: {missing}")
    if "valid" in frame.columns:
        frame = frame[frame["valid"].astype(bool)]
    return frame.dropna(subset=list(columns))


def apply_transform(transform: str, post):
    post = np.asarray(post, dtype=float)
    if transform == "log":
        if np.any(post <= 0):
            raise ValueError("log transform requires strictly positive post values")
        return np.log(post)
    if transform == "identity":
        return post
    raise ValueError(f"transform must be one of {TRANSFORMS}, got {transform!r}")


def fit_hurdle(
    data: pd.DataFrame,
    change_covariates: Sequence[str],
    level_covariates: Sequence[str],
    link: Link = "probit",
    transform: Transform = "log",
) -> HurdleFit:
    """Fit both stages.  ``prior`` always enters both stages as a regressor.

    The two covariate lists may differ.  Each stage does its own listwise
    deletion, so the level stage uses every updater with complete level
    covariates.
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"transform must be one of {TRANSFORMS}, got {transform!r}")
    change_cols = _with_prior(change_covariates)
    level_cols = _with_prior(level_covariates)

    first = _usable(data, change_cols + ["change"])
    X1 = DesignMatrix.from_frame(first, change_cols)
    change_stage = fit_binary(first["change"].to_numpy(dtype=float), X1, link)

    updaters = _usable(data[data["change"] == 1], level_cols + ["post"])
    if len(updaters) == 0:
        raise EmptyUpdaterSubsample("no respondents with change = 1 and complete level covariates")
    X2 = DesignMatrix.from_frame(updaters, level_cols)
    level_stage = fit_ols(apply_transform(transform, updaters["post"]), X2)
    return HurdleFit(
        change_stage=change_stage,
        level_stage=level_stage,
        transform=transform,
        change_covariates=tuple(change_cols),
        level_covariates=tuple(level_cols),
    )


def hurdle_expectations(fit: HurdleFit, frame: pd.DataFrame) -> tuple[np.ndarray, np.ndarray]:
    """Conditional and unconditional expected post for every row of ``frame``.

    conditional   = exp(level index + sigma^2 / 2)
    unconditional = F(change index) * conditional
    """
    if fit.transform != "log":
        raise TransformMismatch(f"closed-form expectations need the log transform, fit uses {fit.transform!r}")
    X1 = DesignMatrix.from_frame(frame, list(fit.change_covariates))
    X2 = DesignMatrix.from_frame(frame, list(fit.level_covariates))
    level_index = X2.values @ fit.level_stage.coefficients
    conditional = np.exp(level_index + 0.5 * fit.sigma**2)
    prob = link_cdf(fit.change_stage.link, X1.values @ fit.change_stage.coefficients)
    return conditional, prob * conditional


def hurdle_expectation(fit: HurdleFit, row: Mapping[str, float]) -> tuple[float, float]:
    frame = pd.DataFrame([{k: float(v) for k, v in row.items()}])
    conditional, unconditional = hurdle_expectations(fit, frame)
    return float(conditional[0]), float(unconditional[0])
