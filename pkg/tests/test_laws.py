import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from frogsim.laws import (
    Bernoulli, Beta, Constant, GeometricNumber, PointMass, Poisson, mean_occupancy,
    parse_occupancy, parse_pi_law, pgf_occupancy, sample_occupancy, sample_occupancy_array,
    sample_pi, sample_pi_array, theta_from_p,
)
from frogsim.rng import SeedSpec
from frogsim.special import DomainError


def _poisson_pgf_series(lam, s, terms=400):
    # independent oracle: truncated sum of P(eta = k) s^k
    total, term = 0.0, math.exp(-lam)
    for k in range(terms):
        total += term * s**k
        term *= lam / (k + 1)
    return total


@pytest.mark.parametrize("lam", [0.3, 2.0, 15.0])
@pytest.mark.parametrize("s", [0.0, 0.25, 0.9, 1.0])
def test_poisson_pgf_vs_series(lam, s):
    assert pgf_occupancy(Poisson(lam), s) == pytest.approx(_poisson_pgf_series(lam, s), rel=1e-12, abs=1e-300)


def test_other_pgfs():
    assert pgf_occupancy(Constant(3), 0.5) == pytest.approx(0.125)
    assert pgf_occupancy(Constant(0), 0.0) == 1.0
    assert pgf_occupancy(Bernoulli(0.3), 0.5) == pytest.approx(0.85)
    g = GeometricNumber(0.4)
    series = sum(0.6 * 0.4**k * 0.7**k for k in range(200))
    assert pgf_occupancy(g, 0.7) == pytest.approx(series, rel=1e-12)
    assert pgf_occupancy(GeometricNumber(1.0), 0.5) == 0.0
    arr = pgf_occupancy(Poisson(1.0), np.array([0.0, 1.0]))
    assert arr.shape == (2,) and arr[1] == 1.0
    with pytest.raises(DomainError):
        pgf_occupancy(Poisson(1.0), 1.5)


def test_means():
    assert mean_occupancy(Constant(2)) == 2
    assert mean_occupancy(GeometricNumber(1.0)) == math.inf
    assert GeometricNumber(0.5).mean() == pytest.approx(1.0)
    assert PointMass(0.3).mean() == 0.3
    assert Beta(1.0, 3.0).mean() == pytest.approx(0.25)


@pytest.mark.parametrize("law", [Poisson(2.5), GeometricNumber(0.6), Bernoulli(0.35), Constant(2)])
def test_sample_mean(law):
    x = sample_occupancy_array(law, 4, 200_000)
    se = math.sqrt(max(x.var(), 1e-12) / x.size)
    assert abs(x.mean() - law.mean()) < 5 * se + 1e-12
    assert sample_occupancy(law, SeedSpec(4, vertex=7)) == x[7]


def test_improper_geometric_not_sampleable():
    with pytest.raises(DomainError):
        sample_occupancy_array(GeometricNumber(1.0), 0, 5)


@pytest.mark.parametrize("a,b", [(1.0, 0.25), (1.0, 0.5), (0.5, 2.0), (5.0, 0.75), (0.3, 0.3)])
def test_beta_sampler_ks(a, b):
    p, _ = sample_pi_array(Beta(a, b), 9, 100_000)
    d = stats.kstest(p, stats.beta(a, b).cdf).statistic
    assert d < 1.95 / math.sqrt(p.size)  # 0.1% level


def test_theta_consistent_near_one():
    p, th = sample_pi_array(Beta(1.0, 0.25), 2, 200_000)
    assert np.all((p > 0) & (p < 1)) or np.all(p <= 1)
    mid = (p < 0.999)
    np.testing.assert_allclose(th[mid], np.arccosh(1.0 / p[mid]), rtol=1e-10)
    assert np.all(th > 0)


def test_point_mass_and_scalar_sampler():
    assert sample_pi(PointMass(0.7), SeedSpec(1)) == 0.7
    p, _ = sample_pi_array(Beta(2.0, 3.0), 5, 10)
    assert sample_pi(Beta(2.0, 3.0), SeedSpec(5, particle=3)) == p[3]
    assert theta_from_p(1.0) == 0.0


def test_parsers():
    assert parse_pi_law("beta:1,0.25") == Beta(1.0, 0.25)
    assert parse_pi_law("point:0.7") == PointMass(0.7)
    assert parse_occupancy("poisson:2") == Poisson(2.0)
    assert parse_occupancy("const:1") == Constant(1)
    assert parse_occupancy("geometric:0.5") == GeometricNumber(0.5)
    assert parse_occupancy("bernoulli:0.5") == Bernoulli(0.5)
    for bad in ("beta:1", "gamma:2", "point:1.5"):
        with pytest.raises(ValueError):
            parse_pi_law(bad)
    with pytest.raises(ValueError):
        parse_occupancy("const:-1")


def test_validation():
    with pytest.raises(DomainError):
        Beta(0.0, 1.0)
    with pytest.raises(DomainError):
        Poisson(701.0)
    with pytest.raises(DomainError):
        Bernoulli(1.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_pgf_monotone_and_bounded(lam, s1, s2):
    lo, hi = sorted((s1, s2))
    for law in (Poisson(lam * 5), Bernoulli(lam), GeometricNumber(lam * 0.99)):
        a, b = pgf_occupancy(law, lo), pgf_occupancy(law, hi)
        assert 0.0 <= a <= b + 1e-15 <= 1.0 + 1e-15
