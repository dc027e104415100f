import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from frogsim.displacement import (
    EngineKind, UnboundedReach, joint_cdf, sample_d_right, sample_d_star_upper,
    sample_exact_pairs, sample_joint_reach, simulate_walk_reach, simulate_walk_reaches,
    tail_d_right, tail_d_right_beta, tail_d_star, tail_d_star_upper, tail_ratio,
)
from frogsim.laws import theta_from_p
from frogsim.rng import SeedSpec
from frogsim.special import DomainError, beta_function


def _first_passage_root(p):
    # independent oracle: r = P(reach +1) solves r = (p/2)(1 + r^2), smallest root in [0, 1]
    return optimize.brentq(lambda r: r - 0.5 * p * (1.0 + r * r), 0.0, 1.0 - 1e-15 if p == 1 else 1.0)


@pytest.mark.parametrize("p", [0.05, 0.3, 0.6, 0.9, 0.999])
def test_tail_ratio_vs_fixed_point(p):
    assert tail_ratio(p) == pytest.approx(_first_passage_root(p), rel=1e-12)
    assert tail_ratio(p) == pytest.approx(math.exp(-theta_from_p(p)), rel=1e-12)


def test_tail_helpers():
    assert tail_d_right(0.5, 0) == 1.0
    assert tail_d_star(0.5, 0) == 1.0
    assert tail_d_star_upper(0.9, 1) == 1.0
    assert tail_d_star(0.5, 3) <= tail_d_star_upper(0.5, 3)
    with pytest.raises(DomainError):
        tail_ratio(0.0)


@pytest.mark.parametrize("p", [0.3, 0.8])
def test_walk_matches_geometric_tail(p):
    w = simulate_walk_reaches(p, 200_000, master_seed=3, window=1000)
    r = tail_ratio(p)
    n = np.arange(0, 30)
    emp = np.array([(w["d_right"] >= k).mean() for k in n])
    assert np.max(np.abs(emp - r**n)) < 0.004
    assert not w["truncated_right"].any()


@pytest.mark.parametrize("p", [0.5, 0.9])
def test_walk_joint_and_star_laws(p):
    w = simulate_walk_reaches(p, 200_000, master_seed=8, window=1000)
    dl, dr = w["d_left"], w["d_right"]
    for a, b in [(1, 1), (2, 3), (4, 1), (5, 5)]:
        emp = ((dl < a) & (dr < b)).mean()
        assert emp == pytest.approx(joint_cdf(p, a, b), abs=0.004)
    star = np.maximum(dl, dr)
    for n in (1, 2, 5, 10):
        assert (star >= n).mean() == pytest.approx(tail_d_star(p, n), abs=0.004)


@pytest.mark.parametrize("p", [0.4, 0.95])
def test_exact_pairs_match_walk(p):
    th = theta_from_p(p)
    ex = sample_exact_pairs(th, 200_000, master_seed=1)
    w = simulate_walk_reaches(p, 200_000, master_seed=2, window=2000)
    for a, b in [(1, 1), (1, 3), (3, 2), (6, 6)]:
        e1 = ((ex["d_left"] >= a) & (ex["d_right"] >= b)).mean()
        e2 = ((w["d_left"] >= a) & (w["d_right"] >= b)).mean()
        assert e1 == pytest.approx(e2, abs=0.006)
    assert np.all(ex["star_upper"] >= np.maximum(ex["d_left"], ex["d_right"]))
    n = np.arange(1, 20)
    emp = np.array([(ex["star_upper"] >= k).mean() for k in n])
    ref = np.array([tail_d_star_upper(p, int(k)) for k in n])
    assert np.max(np.abs(emp - ref)) < 0.004


def test_scalar_samplers():
    s = SeedSpec(12, particle=5)
    r = sample_joint_reach(0.7, 10**6, s)
    assert r.d_star == max(r.d_left, r.d_right)
    assert r.d_right == sample_d_right(0.7, s)
    assert sample_d_star_upper(0.7, s) >= 0
    w = simulate_walk_reach(0.7, 10_000, 100, s)
    assert w.steps_used >= w.d_star
    with pytest.raises(UnboundedReach):
        sample_d_right(1.0, s)
    with pytest.raises(DomainError):
        sample_d_right(1.5, s)


def test_joint_reach_cap():
    r = sample_joint_reach(1.0 - 1e-12, 10, SeedSpec(0))
    assert r.d_right <= 11 and r.d_left <= 11


def test_engine_parse():
    assert EngineKind.parse("exact") == EngineKind.EXACT_WALK
    assert EngineKind.parse("Star-Upper") == EngineKind.STAR_UPPER
    assert EngineKind.RIGHT_ONLY.label == "right"
    with pytest.raises(ValueError):
        EngineKind.parse("nope")


def _beta_tail_oracle(n, a, b):
    # mpmath quadrature in the variable q = 1 - p with a split at the scale 1/n^2
    mpmath.mp.dps = 30
    a, b = mpmath.mpf(a), mpmath.mpf(b)

    def f(q):
        p = 1 - q
        r = p / (1 + mpmath.sqrt(1 - p * p))
        return r**n * p ** (a - 1) * q ** (b - 1)

    pts = [0, mpmath.mpf(1) / n**2, mpmath.mpf(10) / n**2, mpmath.mpf(1) / n, 1]
    pts = sorted({x for x in pts if x <= 1})
    return float(mpmath.quad(f, pts) / mpmath.beta(a, b))


@pytest.mark.parametrize("n,a,b", [(1, 1.0, 1.0), (10, 2.0, 0.5), (100, 1.0, 0.25),
                                   (1000, 5.0, 0.75), (50, 0.5, 2.0)])
def test_beta_tail_vs_mpmath(n, a, b):
    assert tail_d_right_beta(n, a, b) == pytest.approx(_beta_tail_oracle(n, a, b), rel=1e-8)


def test_beta_tail_uniform_closed_form():
    # alpha = beta = 1: E[r(p)^n], checked against a direct 1-d quadrature in p
    mpmath.mp.dps = 30
    ref = float(mpmath.quad(lambda p: (p / (1 + mpmath.sqrt(1 - p * p))) ** 7, [0, 1]))
    assert tail_d_right_beta(7, 1.0, 1.0) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("a", [1.0, 2.0, 5.0])
def test_beta_half_asymptotic(a):
    n = 10**6
    val = n * tail_d_right_beta(n, a, 0.5)
    assert val == pytest.approx(math.sqrt(2.0) / beta_function(a, 0.5), rel=1e-3)


def test_beta_tail_monte_carlo():
    from frogsim.laws import Beta, sample_pi_array

    _, th = sample_pi_array(Beta(2.0, 0.5), 4, 200_000)
    d = sample_exact_pairs(th, th.size, master_seed=6)["d_right"]
    for n in (1, 5, 30):
        assert (d >= n).mean() == pytest.approx(tail_d_right_beta(n, 2.0, 0.5), abs=0.004)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 0.999), st.integers(1, 40), st.integers(1, 40))
def test_joint_cdf_properties(p, a, b):
    c = joint_cdf(p, a, b)
    assert -1e-12 <= c <= 1.0
    assert c <= 1.0 - tail_d_right(p, b) + 1e-12  # below P(D_right < b)
    assert joint_cdf(p, a + 1, b) >= c - 1e-12
    assert joint_cdf(p, a, b) == pytest.approx(joint_cdf(p, b, a), abs=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 10**5), st.floats(0.3, 5.0), st.floats(0.3, 2.0))
def test_beta_tail_in_unit_interval(n, a, b):
    v = tail_d_right_beta(n, a, b)
    assert 0.0 < v <= 1.0
    assert tail_d_right_beta(n + 1, a, b) <= v * (1 + 1e-9)
