import io
import warnings

import numpy as np
import pandas as pd
import pytest

from skeptic_update.dataio import COLUMNS, format_survey, read_survey
from skeptic_update.errors import InvalidConfig
from skeptic_update.simulate import (
    DEFAULT_LAWS,
    TARGET_CENSORING,
    Bounded,
    DgpConfig,
    calibrate_sigma,
    censoring_share,
    draw_covariates,
    generator,
    mc_recover,
    simulate_survey,
)


def test_same_seed_same_frame():
    config = DgpConfig(n=300, seed=11)
    a = simulate_survey(config, replication=3)
    b = simulate_survey(config, replication=3)
    pd.testing.assert_frame_equal(a, b)
    assert not simulate_survey(config, replication=4).equals(a)
    assert list(a.columns) == list(COLUMNS)


@pytest.mark.parametrize(
    "model, transform", [("tobit", "identity"), ("hurdle", "identity"), ("hurdle", "log"), ("linear", "identity")]
)
def test_bounded_output_passes_loader_validation(model, transform):
    frame = simulate_survey(DgpConfig(model=model, n=2000, seed=5, transform=transform, bounded=True))
    if model == "linear":
        # every row is an updater; the level law is unbounded by design
        assert frame["change"].eq(1).all()
        return
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        loaded, report = read_survey(io.StringIO(format_survey(frame)))
    assert report.violations == []
    assert loaded["post"].min() >= 0.1
    assert np.all(np.round(loaded["post"], 2) == loaded["post"])


def test_tobit_censoring_near_target_across_seeds():
    shares = [censoring_share(simulate_survey(DgpConfig(n=2885, seed=s, bounded=False))) for s in range(20)]
    assert all(0.93 <= s <= 0.97 for s in shares)
    assert np.mean(shares) == pytest.approx(TARGET_CENSORING, abs=0.005)


def test_calibrated_sigma_hits_target():
    config = DgpConfig()
    sigma = calibrate_sigma(config)
    assert sigma == config.sigma
    big = simulate_survey(DgpConfig(n=200_000, seed=99, bounded=False))
    assert censoring_share(big) == pytest.approx(TARGET_CENSORING, abs=0.002)


def test_small_sigma_limit_is_deterministic():
    config = DgpConfig(n=500, seed=3, bounded=False, params={"sigma": 1e-9})
    frame = simulate_survey(config)
    coefs = config.coefficients()
    mean = coefs["const"] + sum(coefs[c] * frame[c] for c in coefs if c != "const")
    expected = np.minimum(frame["prior"], mean)
    np.testing.assert_allclose(frame["post"], expected, atol=1e-6)


def test_covariate_moments_match_laws():
    n = 100_000
    config = DgpConfig(n=n)
    frame = draw_covariates(config, generator(1))
    for name, law in DEFAULT_LAWS.items():
        col = frame[name].to_numpy()
        if isinstance(law, Bounded):
            assert col.mean() == pytest.approx(law.mean, abs=4 * law.sd / np.sqrt(n))
            assert col.std() == pytest.approx(law.sd, rel=0.03)
            assert law.lo <= col.min() and col.max() <= law.hi
            if law.integer:
                assert np.all(col == np.round(col))
        else:
            assert col.mean() == pytest.approx(law.p, abs=4 * np.sqrt(law.p * (1 - law.p) / n))


def test_gaussian_copula_induces_correlation():
    R = np.eye(6)
    R[0, 2] = R[2, 0] = 0.6
    frame = draw_covariates(DgpConfig(n=20_000, correlation=R), generator(2))
    assert np.corrcoef(frame["prior"], frame["age"])[0, 1] > 0.4


@pytest.mark.parametrize(
    "kwargs",
    [
        {"model": "probit"},
        {"n": 10},
        {"params": {"bogus": 1.0}},
        {"params": {"sigma": -1.0}},
        {"transform": "sqrt"},
        {"correlation": np.ones((6, 6))},
        {"target_censoring": 1.0},
    ],
)
def test_invalid_config(kwargs):
    with pytest.raises(InvalidConfig):
        DgpConfig(**kwargs)


def test_mc_independent_of_thread_count():
    config = DgpConfig(n=400, seed=8, bounded=False)
    one = mc_recover(config, 6, threads=1)
    four = mc_recover(config, 6, threads=4)
    np.testing.assert_array_equal(one.estimates, four.estimates)
    assert one.parameters == four.parameters


def test_mc_summary_arithmetic():
    rep = mc_recover(DgpConfig(model="linear", n=200, seed=4, bounded=False), 30, threads=1)
    p = rep.get("prior")
    col = rep.estimates[:, [q.name for q in rep.parameters].index("prior")]
    assert p.mean == pytest.approx(col.mean())
    assert p.mc_se == pytest.approx(col.std(ddof=1) / np.sqrt(30))
    assert 0.0 <= p.coverage <= 1.0
    assert rep.n_ok == 30
