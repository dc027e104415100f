import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frogsim import rng
from frogsim.rng import SeedSpec, uniforms


def test_uniform_is_pure():
    a = SeedSpec(7, 1, 2, 3, rng.RIGHT)
    assert a.uniform() == a.uniform()
    assert a.uniform(0) != a.uniform(1)
    assert a.uniform() != a.at(particle=4).uniform()


def test_vectorised_matches_scalar():
    v = uniforms(11, 3, np.arange(-5, 5), 2, rng.PI, counter=4)
    for j, x in enumerate(range(-5, 5)):
        assert v[j] == SeedSpec(11, 3, x, 2, rng.PI).uniform(4)


def test_uniforms_look_uniform():
    u = uniforms(0, 0, 0, np.arange(200_000), rng.WALK)
    assert 0 < u.min() and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.003
    counts, _ = np.histogram(u, bins=20, range=(0, 1))
    chi2 = ((counts - 10_000) ** 2 / 10_000).sum()
    assert chi2 < 60  # 19 dof, far tail


def test_purposes_distinct_streams():
    u = [SeedSpec(5, 0, 0, 0, p).uniform() for p in rng.PURPOSES.values()]
    assert len(set(u)) == len(u)


def test_seed_range():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(2**64)
    SeedSpec(2**64 - 1).uniform()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**64 - 1), st.integers(-10**6, 10**6), st.integers(0, 10**6))
def test_open_interval(seed, vertex, counter):
    u = SeedSpec(seed, 0, vertex, 0, rng.ETA).uniform(counter)
    assert 0.0 < u < 1.0
