"""Synthetic survey generator and Monte-Carlo parameter-recovery harness.

Three data-generating processes are available:

``tobit``
    post_latent = gamma * prior + X delta + u,  post = min(prior, post_latent)
``hurdle``
    change ~ Bernoulli(Phi(change index)); updaters draw
    G(post) ~ N(level index, sigma^2)
``linear``
    post = level index + e for everybody (the updater-only regression)

With ``bounded=True`` (the default) draws respect the instrument: percents
carry two decimals, updated posts lie in [0.1, prior).  Bounding truncates
the error distribution, so recovery studies use ``bounded=False``, where
the simulated data follow the estimated model exactly.

Randomness comes from a Philox generator keyed by ``(seed, replication)``,
so every replication is reproducible on its own, whatever the order or
thread in which it runs.
"""

from __future__ import annotations

import functools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from .dataio import COLUMNS
from .errors import InvalidConfig, SkepticUpdateError
from .estimators import DesignMatrix, fit_hurdle, fit_ols, fit_tobit_generalized
from .numerics import std_normal_cdf

MODELS = ("tobit", "hurdle", "linear")
COVARIATE_ORDER = ("prior", "gender", "age", "police", "educ_int", "matching_gender")

POST_FLOOR = 0.1
PERCENT_DECIMALS = 2
TARGET_CENSORING = 1.0 - 127 / 2885


# ---------------------------------------------------------------------------
# Covariate laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bernoulli:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise InvalidConfig(f"Bernoulli probability must lie in [0, 1], got {self.p}")

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        return (u < self.p).astype(float)


@dataclass(frozen=True)
class Bounded:
    """Scaled Beta law on ``[lo, hi]`` matching a target mean and sd.

    Integer laws spread the Beta over ``[lo - 0.5, hi + 0.5]``, shrink its
    variance by the rounding term 1/12 and round to the nearest integer.
    """

    mean: float
    sd: float
    lo: float
    hi: float
    integer: bool = False

    def __post_init__(self):
        a, b = self.shape  # validates feasibility
        if not (a > 0 and b > 0):
            raise InvalidConfig(f"infeasible moments for {self}")

    @property
    def support(self) -> tuple[float, float]:
        if self.integer:
            return self.lo - 0.5, self.hi + 0.5
        return self.lo, self.hi

    @property
    def shape(self) -> tuple[float, float]:
        lo, hi = self.support
        width = hi - lo
        var = self.sd**2 - (1.0 / 12.0 if self.integer else 0.0)
        m = (self.mean - lo) / width
        v = var / width**2
        if not (0 < m < 1 and 0 < v < m * (1 - m)):
            raise InvalidConfig(f"mean {self.mean} / sd {self.sd} not attainable on [{self.lo}, {self.hi}]")
        total = m * (1 - m) / v - 1.0
        return m * total, (1 - m) * total

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        a, b = self.shape
        lo, hi = self.support
        x = lo + (hi - lo) * stats.beta.ppf(u, a, b)
        if self.integer:
            x = np.clip(np.round(x), self.lo, self.hi)
        return x


# Survey moments (n = 2885): mean, sd and support per covariate
DEFAULT_LAWS: dict[str, Bernoulli | Bounded] = {
    "prior": Bounded(34.91, 26.49, 1.0, 98.0),
    "gender": Bernoulli(0.53),
    "age": Bounded(38.55, 16.23, 16, 94, integer=True),
    "police": Bounded(2.95, 0.96, 1, 5, integer=True),
    "educ_int": Bernoulli(0.83),
    "matching_gender": Bernoulli(0.77),
}

# ---------------------------------------------------------------------------
# Planted truths
# ---------------------------------------------------------------------------

TOBIT_COVARIATES = ("age", "gender", "matching_gender", "educ_int")
CHANGE_COVARIATES = ("age", "gender", "matching_gender", "educ_int")
LEVEL_COVARIATES = ("age", "gender", "matching_gender", "educ_int", "police")

# Latent-posterior coefficients: the reference transformed-model estimates
# with the prior coefficient subtracted from one and the other signs flipped.
TOBIT_TRUTH = {
    "prior": 1.0 - 0.502,
    "const": 232.149,
    "age": 0.728,
    "gender": 18.036,
    "matching_gender": -63.480,
    "educ_int": -19.307,
}

CHANGE_TRUTH = {
    "prior": 0.003,
    "const": -2.813,
    "age": -0.009,
    "gender": -0.238,
    "matching_gender": 0.804,
    "educ_int": 0.261,
}

# OLS of post (identity scale) on the updating subsample
LEVEL_TRUTH = {
    "prior": 0.023,
    "const": 1.697,
    "age": 0.026,
    "gender": 0.988,
    "matching_gender": 1.074,
    "educ_int": -4.188,
    "police": 0.494,
}
LEVEL_SIGMA = 2.375

# Log-scale level truths chosen so exp(index) sits near the updaters' mean post
LOG_LEVEL_TRUTH = {
    "prior": 0.008,
    "const": 0.35,
    "age": 0.004,
    "gender": 0.15,
    "matching_gender": 0.10,
    "educ_int": -0.40,
    "police": 0.08,
}
LOG_LEVEL_SIGMA = 0.8


def default_params(model: str, transform: str = "identity") -> dict[str, float | None]:
    if model == "tobit":
        return {**TOBIT_TRUTH, "sigma": None}
    level, sigma = (LOG_LEVEL_TRUTH, LOG_LEVEL_SIGMA) if transform == "log" else (LEVEL_TRUTH, LEVEL_SIGMA)
    if model == "hurdle":
        out = {f"change.{k}": v for k, v in CHANGE_TRUTH.items()}
        out.update({f"level.{k}": v for k, v in level.items()})
        out["sigma"] = sigma
        return out
    if model == "linear":
        return {**level, "sigma": sigma}
    raise InvalidConfig(f"model must be one of {MODELS}, got {model!r}")


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DgpConfig:
    """Planted parameters and covariate laws for one synthetic survey.

    ``params`` uses the estimator names: ``prior``, ``const`` and covariate
    names for tobit/linear, ``change.*`` / ``level.*`` for hurdle, plus
    ``sigma``.  A tobit ``sigma`` of ``None`` is calibrated so the expected
    share of non-updaters equals ``target_censoring``.
    """

    model: str = "tobit"
    params: Mapping[str, float | None] = field(default_factory=dict)
    n: int = 2885
    seed: int = 20240917
    laws: Mapping[str, Bernoulli | Bounded] = field(default_factory=lambda: dict(DEFAULT_LAWS))
    transform: str = "identity"
    bounded: bool = True
    correlation: np.ndarray | None = None
    target_censoring: float = TARGET_CENSORING

    def __post_init__(self):
        if self.model not in MODELS:
            raise InvalidConfig(f"model must be one of {MODELS}, got {self.model!r}")
        if self.transform not in ("identity", "log"):
            raise InvalidConfig(f"transform must be 'identity' or 'log', got {self.transform!r}")
        if self.n < 50:
            raise InvalidConfig(f"n must be at least 50, got {self.n}")
        missing = [c for c in COVARIATE_ORDER if c not in self.laws]
        if missing:
            raise InvalidConfig(f"no law for covariates {missing}")
        merged = default_params(self.model, self.transform)
        unknown = set(self.params) - set(merged)
        if unknown:
            raise InvalidConfig(f"unknown parameters for {self.model}: {sorted(unknown)}")
        merged.update(self.params)
        object.__setattr__(self, "params", merged)
        sigma = merged["sigma"]
        if sigma is not None:
            floor = 0.0 if self.model == "linear" else None
            if not (sigma > 0 or (floor is not None and sigma >= floor)):
                raise InvalidConfig(f"sigma must be positive, got {sigma}")
        if self.correlation is not None:
            R = np.asarray(self.correlation, dtype=float)
            k = len(COVARIATE_ORDER)
            if R.shape != (k, k) or not np.allclose(R, R.T) or np.any(np.diag(R) != 1.0):
                raise InvalidConfig(f"correlation must be a symmetric {k}x{k} matrix with unit diagonal")
            try:
                np.linalg.cholesky(R)
            except np.linalg.LinAlgError:
                raise InvalidConfig("correlation matrix is not positive definite") from None
            object.__setattr__(self, "correlation", R)
        if not 0.0 < self.target_censoring < 1.0:
            raise InvalidConfig("target_censoring must lie in (0, 1)")

    @property
    def sigma(self) -> float:
        sigma = self.params["sigma"]
        if sigma is None:
            return calibrate_sigma(self)
        return float(sigma)

    def resolved(self) -> DgpConfig:
        """Copy with a calibrated sigma filled in."""
        if self.params["sigma"] is not None:
            return self
        return replace(self, params={**self.params, "sigma": self.sigma})

    def with_params(self, **updates: float) -> DgpConfig:
        return replace(self, params={**self.params, **updates})

    def coefficients(self, prefix: str = "") -> dict[str, float]:
        out = {}
        for key, value in self.params.items():
            if key == "sigma" or not key.startswith(prefix):
                continue
            out[key[len(prefix) :]] = float(value)
        return out


def generator(seed: int, replication: int | None = None) -> np.random.Generator:
    entropy = [int(seed)] if replication is None else [int(seed), int(replication)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def draw_covariates(config: DgpConfig, rng: np.random.Generator, n: int | None = None) -> pd.DataFrame:
    n = config.n if n is None else n
    k = len(COVARIATE_ORDER)
    if config.correlation is None:
        u = rng.random((n, k))
    else:
        z = rng.standard_normal((n, k)) @ np.linalg.cholesky(config.correlation).T
        u = std_normal_cdf(z)
    cols = {name: config.laws[name].from_uniform(u[:, j]) for j, name in enumerate(COVARIATE_ORDER)}
    return pd.DataFrame(cols)


def _index(frame: pd.DataFrame, coefs: Mapping[str, float]) -> np.ndarray:
    out = np.full(len(frame), float(coefs.get("const", 0.0)))
    for name, value in coefs.items():
        if name != "const":
            out += value * frame[name].to_numpy(dtype=float)
    return out


def _round_percent(x):
    return np.round(x, PERCENT_DECIMALS)


@functools.lru_cache(maxsize=64)
def _calibrate(key, target: float, n_draws: int) -> float:
    coefs, laws, correlation = key
    config = DgpConfig(
        model="tobit",
        params={**dict(coefs), "sigma": 1.0},
        laws=dict(laws),
        correlation=None if correlation is None else np.array(correlation),
        n=n_draws,
    )
    frame = draw_covariates(config, generator(0xC0FFEE), n_draws)
    prior = frame["prior"].to_numpy()
    # y* = prior - post_latent = mu - u; censored iff u >= mu
    mu = prior - _index(frame, dict(coefs))

    def share(log_sigma):
        return float(np.mean(std_normal_cdf(-mu / math.exp(log_sigma))))

    lo, hi = math.log(1e-3), math.log(1e5)
    if not share(hi) <= target <= share(lo):
        raise InvalidConfig(f"censoring share {target} unreachable for these coefficients")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if share(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return math.exp(0.5 * (lo + hi))


def calibrate_sigma(config: DgpConfig, target: float | None = None, n_draws: int = 200_000) -> float:
    """Error sd giving an expected censoring share of ``target`` (tobit only).

    Bisection on log sigma of the average censoring probability
    ``mean Phi(-mu_i / sigma)`` over a large fixed covariate sample.
    """
    if config.model != "tobit":
        raise InvalidConfig("sigma calibration applies to the tobit model")
    target = config.target_censoring if target is None else target
    coefs = tuple(sorted(config.coefficients().items()))
    laws = tuple(sorted(config.laws.items()))
    corr = None if config.correlation is None else tuple(map(tuple, config.correlation))
    return _calibrate((coefs, laws, corr), target, n_draws)


# ---------------------------------------------------------------------------
# Survey simulation
# ---------------------------------------------------------------------------


def simulate_survey(config: DgpConfig, replication: int | None = None) -> pd.DataFrame:
    """Draw one synthetic survey in the dataio column layout.

    The same ``(config, replication)`` always yields the identical frame.
    """
    rng = generator(config.seed, replication)
    frame = draw_covariates(config, rng)
    if config.bounded:
        frame["prior"] = _round_percent(frame["prior"].to_numpy())
    prior = frame["prior"].to_numpy()
    n = len(frame)
    sigma = config.sigma

    if config.model == "tobit":
        latent = _index(frame, config.coefficients()) + sigma * rng.standard_normal(n)
        change = latent < prior
        post = np.where(change, latent, prior)
        if config.bounded:
            post = np.where(change, np.maximum(_round_percent(post), POST_FLOOR), prior)
            change = post < prior
            post = np.where(change, post, prior)
    elif config.model == "hurdle":
        u_change = rng.random(n)
        z = rng.standard_normal(n)
        u_level = rng.random(n)
        change = u_change < std_normal_cdf(_index(frame, config.coefficients("change.")))
        mean = _index(frame, config.coefficients("level."))
        if config.bounded:
            g = np.log if config.transform == "log" else (lambda x: x)
            a = (g(POST_FLOOR) - mean) / sigma
            b = (g(prior) - mean) / sigma
            draw = mean + sigma * stats.truncnorm.ppf(u_level, a, b)
            level = np.exp(draw) if config.transform == "log" else draw
            level = np.clip(_round_percent(level), POST_FLOOR, None)
            level = np.minimum(level, prior - 10.0**-PERCENT_DECIMALS)
        else:
            draw = mean + sigma * z
            level = np.exp(draw) if config.transform == "log" else draw
        post = np.where(change, level, prior)
    else:  # linear
        draw = _index(frame, config.coefficients()) + sigma * rng.standard_normal(n)
        post = np.exp(draw) if config.transform == "log" else draw
        change = np.ones(n, dtype=bool)

    frame["change"] = change.astype(float)
    frame["post"] = post
    return frame[list(COLUMNS)]


def censoring_share(frame: pd.DataFrame) -> float:
    return float(np.mean(frame["change"].to_numpy() == 0))


# ---------------------------------------------------------------------------
# Monte-Carlo recovery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterSummary:
    name: str
    truth: float
    mean: float
    bias: float
    sd: float
    mc_se: float
    coverage: float

    @property
    def within_2se(self) -> bool:
        return abs(self.bias) <= 2.0 * self.mc_se


@dataclass(frozen=True)
class McReport:
    model: str
    replications: int
    n: int
    parameters: tuple[ParameterSummary, ...]
    failures: tuple[tuple[int, str], ...]
    estimates: np.ndarray
    standard_errors: np.ndarray
    extra: dict = field(default_factory=dict)

    @property
    def n_ok(self) -> int:
        return self.replications - len(self.failures)

    def get(self, name: str) -> ParameterSummary:
        for p in self.parameters:
            if p.name == name:
                return p
        raise KeyError(name)


def fit_replication(config: DgpConfig, frame: pd.DataFrame) -> dict[str, tuple[float, float]]:
    """Fit the estimator matching ``config.model``; returns name -> (estimate, se)."""
    if config.model == "tobit":
        covs = [c for c in config.coefficients() if c not in ("prior", "const")]
        X = DesignMatrix.from_frame(frame, covs)
        fit = fit_tobit_generalized(frame["prior"].to_numpy(), frame["post"].to_numpy(), X)
        latent = fit.latent_coefficients()
        out = {name: (float(v), float(se)) for name, v, se in zip(fit.names, latent, fit.standard_errors)}
        out["sigma"] = (fit.sigma, fit.sigma * fit.log_sigma_se)
        out["censoring"] = (fit.n_censored / fit.n, math.nan)
        return out
    if config.model == "hurdle":
        change_covs = [c for c in config.coefficients("change.") if c not in ("prior", "const")]
        level_covs = [c for c in config.coefficients("level.") if c not in ("prior", "const")]
        fit = fit_hurdle(frame, change_covs, level_covs, link="probit", transform=config.transform)
        out = {}
        for prefix, stage in (("change.", fit.change_stage), ("level.", fit.level_stage)):
            for name, v, se in zip(stage.names, stage.coefficients, stage.standard_errors):
                out[prefix + name] = (float(v), float(se))
        out["sigma"] = (fit.sigma, math.nan)
        return out
    covs = [c for c in config.coefficients() if c not in ("prior", "const")]
    X = DesignMatrix.from_frame(frame, ["prior", *covs])
    y = frame["post"].to_numpy()
    fit = fit_ols(np.log(y) if config.transform == "log" else y, X)
    out = {name: (float(v), float(se)) for name, v, se in zip(fit.names, fit.coefficients, fit.standard_errors)}
    out["sigma"] = (fit.residual_std_error, math.nan)
    return out


def _replicate(config: DgpConfig, r: int):
    try:
        return r, fit_replication(config, simulate_survey(config, replication=r)), None
    except SkepticUpdateError as exc:
        return r, None, f"{type(exc).__name__}: {exc}"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SKEPTIC_UPDATE_THREADS", "1")))
    except ValueError:
        return 1


def mc_recover(config: DgpConfig, replications: int, threads: int | None = None) -> McReport:
    """Simulate-and-fit ``replications`` times and summarize recovery.

    Coverage counts replications whose nominal 95% Wald interval
    (estimate +/- 1.96 se) contains the truth.  Failed fits are excluded
    and listed in ``failures``.
    """
    if replications < 2:
        raise InvalidConfig("need at least 2 replications")
    config = config.resolved()
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1:
        results = [_replicate(config, r) for r in range(replications)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda r: _replicate(config, r), range(replications)))
    results.sort(key=lambda t: t[0])

    ok = [res for _, res, err in results if err is None]
    failures = tuple((r, err) for r, _, err in results if err is not None)
    truths = {k: float(v) for k, v in config.params.items()}
    names = [k for k in (ok[0].keys() if ok else truths) if k in truths]
    est = np.array([[res[k][0] for k in names] for res in ok]).reshape(len(ok), len(names))
    ses = np.array([[res[k][1] for k in names] for res in ok]).reshape(len(ok), len(names))

    summaries = []
    for j, name in enumerate(names):
        truth = truths[name]
        col = est[:, j]
        mean = float(np.mean(col)) if col.size else math.nan
        sd = float(np.std(col, ddof=1)) if col.size > 1 else math.nan
        mc_se = sd / math.sqrt(col.size) if col.size > 1 else math.nan
        se = ses[:, j]
        if col.size and np.all(np.isfinite(se)):
            coverage = float(np.mean(np.abs(col - truth) <= 1.959963984540054 * se))
        else:
            coverage = math.nan
        summaries.append(ParameterSummary(name, truth, mean, mean - truth, sd, mc_se, coverage))

    extra = {}
    if ok and "censoring" in ok[0]:
        extra["censoring_share"] = float(np.mean([res["censoring"][0] for res in ok]))
    return McReport(
        model=config.model,
        replications=replications,
        n=config.n,
        parameters=tuple(summaries),
        failures=failures,
        estimates=est,
        standard_errors=ses,
        extra=extra,
    )


# ---------------------------------------------------------------------------
# Golden fixture
# ---------------------------------------------------------------------------

GOLDEN_N = 2885
GOLDEN_SEED = 2885
GOLDEN_MISSING = {"age": 56, "police": 22}
GOLDEN_UPDATER_AGE_MISSING = 6


def plant_missing(
    frame: pd.DataFrame,
    rng: np.random.Generator,
    counts: Mapping[str, int],
    among: Mapping[str, np.ndarray] | None = None,
    exclude: Sequence[int] = (),
) -> pd.DataFrame:
    """Blank ``counts[c]`` cells of each column ``c``, chosen without replacement.

    ``among[c]`` optionally restricts the candidate rows (positional).
    """
    frame = frame.copy()
    for col, count in counts.items():
        pool = np.arange(len(frame)) if among is None or col not in among else np.asarray(among[col])
        pool = np.setdiff1d(pool, np.asarray(exclude, dtype=int))
        if count > pool.size:
            raise InvalidConfig(f"cannot blank {count} cells of {col} from {pool.size} candidates")
        rows = rng.choice(pool, size=count, replace=False)
        frame.iloc[np.sort(rows), frame.columns.get_loc(col)] = np.nan
    return frame


def golden_fixture() -> pd.DataFrame:
    """The shipped 2885-row survey used by the snapshot tests.

    Tobit DGP at the planted truths with instrument bounds, then 56 missing
    ages (6 of them among updaters), 22 missing police ratings (all among
    non-updaters), and one deliberately invalid row (an upward revision)
    that the loader must flag.  Listwise deletion on the tobit covariates
    leaves 2885 - 1 - 56 = 2828 rows.
    """
    config = DgpConfig(model="tobit", n=GOLDEN_N, seed=GOLDEN_SEED, bounded=True)
    frame = simulate_survey(config)
    rng = generator(GOLDEN_SEED, 1)
    change = frame["change"].to_numpy() == 1
    updaters, stayers = np.flatnonzero(change), np.flatnonzero(~change)

    # one non-updater turns into an upward revision: change=1 with post > prior
    bad = int(rng.choice(stayers[frame["prior"].to_numpy()[stayers] <= 90]))
    frame.iloc[bad, frame.columns.get_loc("change")] = 1.0
    frame.iloc[bad, frame.columns.get_loc("post")] = frame["prior"].iloc[bad] + 5.0
    stayers = stayers[stayers != bad]

    frame = plant_missing(frame, rng, {"age": GOLDEN_UPDATER_AGE_MISSING}, among={"age": updaters})
    already = np.flatnonzero(frame["age"].isna().to_numpy())
    frame = plant_missing(
        frame,
        rng,
        {"age": GOLDEN_MISSING["age"] - GOLDEN_UPDATER_AGE_MISSING, "police": GOLDEN_MISSING["police"]},
        among={"age": stayers, "police": stayers},
        exclude=already,
    )
    return frame
