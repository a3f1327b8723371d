import math

import numpy as np
import pytest
from scipy import stats

from quantile_forge.distributions import (
    FAMILIES,
    DistributionSpec,
    cdf,
    normal_inv_cdf,
    parse_distribution,
    quantile,
    sample,
)
from quantile_forge.rng import RngStream, stable_hash64

PARAM_SETS = [
    DistributionSpec("normal", (0.0, 1.0)),
    DistributionSpec("normal", (-3.0, 0.25)),
    DistributionSpec("lognormal", (0.0, 1.0)),
    DistributionSpec("lognormal", (1.2, 0.4)),
    DistributionSpec("exponential", (1.0,)),
    DistributionSpec("exponential", (0.2,)),
    DistributionSpec("weibull", (0.5, 1.0)),
    DistributionSpec("weibull", (2.0, 1.0)),
    DistributionSpec("lomax", (1.5, 1.0)),
    DistributionSpec("lomax", (0.5, 3.0)),
    DistributionSpec("loglogistic", (1.0, 1.5)),
    DistributionSpec("loglogistic", (2.0, 4.0)),
]

SCIPY = {
    "normal": lambda mu, s: stats.norm(mu, s),
    "lognormal": lambda mu, s: stats.lognorm(s, scale=math.exp(mu)),
    "exponential": lambda rate: stats.expon(scale=1 / rate),
    "weibull": lambda k, lam: stats.weibull_min(k, scale=lam),
    "lomax": lambda a, lam: stats.lomax(a, scale=lam),
    "loglogistic": lambda alpha, beta: stats.fisk(beta, scale=alpha),
}

LOG_GRID = np.concatenate([np.logspace(-6, math.log10(0.5), 60), 1 - np.logspace(-6, math.log10(0.5), 60)[::-1]])


def test_spec_validation():
    with pytest.raises(ValueError):
        DistributionSpec("cauchy", (0.0, 1.0))
    with pytest.raises(ValueError):
        DistributionSpec("normal", (0.0, -1.0))
    with pytest.raises(ValueError):
        DistributionSpec("weibull", (2.0,))
    with pytest.raises(ValueError):
        DistributionSpec("lomax", (0.0, 1.0))
    assert DistributionSpec("LogNormal", (0, 1)).family == "lognormal"
    assert set(FAMILIES) == {"normal", "lognormal", "exponential", "weibull", "lomax", "loglogistic"}


def test_quantile_examples():
    assert quantile(DistributionSpec("exponential", (1.0,)), 1 - math.exp(-1)) == pytest.approx(1.0, rel=1e-15)
    assert quantile(DistributionSpec("lomax", (2.0, 1.0)), 0.75) == pytest.approx(1.0, rel=1e-15)
    assert quantile(DistributionSpec("loglogistic", (1.0, 1.0)), 0.5) == pytest.approx(1.0, rel=1e-15)
    assert quantile(DistributionSpec("normal", (0.0, 1.0)), 0.5) == 0.0


def test_cdf_examples():
    assert cdf(DistributionSpec("exponential", (1.0,)), math.log(2)) == pytest.approx(0.5, rel=1e-15)
    assert cdf(DistributionSpec("weibull", (2.0, 1.0)), 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert cdf(DistributionSpec("lomax", (2.0, 1.0)), 1.0) == pytest.approx(0.75, rel=1e-15)


@pytest.mark.parametrize("dist", [d for d in PARAM_SETS if d.family != "normal"])
def test_cdf_is_zero_below_support(dist):
    assert cdf(dist, -1.0) == 0.0
    assert cdf(dist, 0.0) == 0.0


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5, 2.0])
def test_quantile_rejects_boundary(p):
    with pytest.raises(ValueError):
        quantile(DistributionSpec("exponential", (1.0,)), p)


@pytest.mark.parametrize("dist", PARAM_SETS, ids=str)
def test_round_trip(dist):
    x = quantile(dist, LOG_GRID)
    assert np.max(np.abs(cdf(dist, x) - LOG_GRID)) <= 1e-9
    interior = x[(LOG_GRID > 1e-3) & (LOG_GRID < 1 - 1e-3)]
    assert np.allclose(quantile(dist, cdf(dist, interior)), interior, rtol=1e-9, atol=0)


@pytest.mark.parametrize("dist", PARAM_SETS, ids=str)
def test_quantile_strictly_increasing(dist):
    x = quantile(dist, np.linspace(1e-4, 1 - 1e-4, 1000))
    assert np.all(np.diff(x) > 0)


@pytest.mark.parametrize("dist", PARAM_SETS, ids=str)
def test_against_scipy(dist):
    ref = SCIPY[dist.family](*dist.params)
    p = np.linspace(0.01, 0.99, 99)
    assert np.allclose(quantile(dist, p), ref.ppf(p), rtol=1e-9, atol=1e-12)
    x = ref.ppf(p)
    assert np.allclose(cdf(dist, x), ref.cdf(x), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("scale", [0.3, 1.0, 7.5])
def test_weibull_shape_one_is_exponential(scale):
    p = np.linspace(0.001, 0.999, 500)
    w = quantile(DistributionSpec("weibull", (1.0, scale)), p)
    e = quantile(DistributionSpec("exponential", (1 / scale,)), p)
    assert np.allclose(w, e, rtol=1e-12, atol=0)


def test_normal_inv_cdf_examples():
    assert normal_inv_cdf(0.5) == 0.0
    assert normal_inv_cdf(0.975) == pytest.approx(1.959964, abs=1e-6)
    p = np.linspace(0.001, 0.499, 300)
    assert np.allclose(normal_inv_cdf(1 - p), -normal_inv_cdf(p), rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        normal_inv_cdf(0.0)
    with pytest.raises(ValueError):
        normal_inv_cdf(1.0)


def test_normal_inv_cdf_accuracy():
    p = np.concatenate([np.logspace(-16, -0.31, 4000), np.linspace(0.01, 0.99, 4000)])
    p = np.concatenate([p, 1 - p])
    assert np.max(np.abs(normal_inv_cdf(p) - stats.norm.ppf(p))) <= 1.15e-9


# ---------------------------------------------------------------------------
# RNG and sampling
# ---------------------------------------------------------------------------


def test_stream_determinism_and_counter():
    a, b = RngStream(42, 7), RngStream(42, 7)
    assert np.array_equal(a.uniforms(1000), b.uniforms(1000))
    assert a.counter == 1000
    other = RngStream(42, 8).uniforms(1000)
    assert not np.array_equal(RngStream(42, 7).uniforms(1000), other)


def test_stream_split_reads_are_contiguous():
    whole = RngStream(3, 1).uniforms(100)
    s = RngStream(3, 1)
    parts = np.concatenate([s.uniforms(30), s.uniforms(70)])
    assert np.array_equal(whole, parts)


def test_stream_is_pinned():
    # frozen output: guards against silent changes to the generator or mapping
    u = RngStream(20200101, 5).uniforms(3)
    assert u.tolist() == [0.5208059707873264, 0.8000393108544249, 0.9891133226338004]


def test_uniforms_stay_open():
    u = RngStream(1, 2).uniforms(200_000)
    assert u.min() > 0.0 and u.max() < 1.0


def test_stable_hash_is_stable():
    assert stable_hash64("exponential", (1.0,), "HF7", 15, (0.5).hex()) == stable_hash64(
        "exponential", (1.0,), "HF7", 15, (0.5).hex()
    )
    assert stable_hash64("a") != stable_hash64("b")


def test_sample_examples():
    dist = DistributionSpec("exponential", (1.0,))
    assert np.array_equal(sample(dist, RngStream(9, 9), 50), sample(dist, RngStream(9, 9), 50))
    draws = sample(dist, RngStream(9, 10), 10**6)
    assert abs(draws.mean() - 1.0) <= 3 / math.sqrt(10**6)

    lomax = DistributionSpec("lomax", (0.5, 1.0))
    draws = sample(lomax, RngStream(9, 11), 10**5)
    assert np.mean(draws <= quantile(lomax, 0.9)) == pytest.approx(0.9, abs=0.01)
    with pytest.raises(ValueError):
        sample(dist, RngStream(1), 0)


@pytest.mark.parametrize("dist", PARAM_SETS, ids=str)
def test_sampling_ks(dist):
    draws = sample(dist, RngStream(1234, stable_hash64(str(dist))), 10**5)
    result = stats.kstest(draws, lambda x: cdf(dist, x))
    assert result.pvalue > 0.001


def test_parse_distribution():
    assert parse_distribution("lomax") == DistributionSpec("lomax", (1.5, 1.0))
    assert parse_distribution({"family": "weibull", "params": [0.5, 1]}) == DistributionSpec("weibull", (0.5, 1.0))
    assert parse_distribution({"family": "Exponential"}) == DistributionSpec("exponential", (1.0,))
    for bad in ({"params": [1]}, {"family": "beta"}, {"family": "normal", "params": "0,1"}, 3):
        with pytest.raises(ValueError):
            parse_distribution(bad)
