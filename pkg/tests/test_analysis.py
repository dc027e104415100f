import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frogsim.analysis import (
    EXTINCTION_MET, INDETERMINATE, SURVIVAL_MET, THEOREM_EXTINCT, THEOREM_SURVIVE, UNKNOWN,
    alpha0, criterion_check, phase_diagram, scaled_tail_curve, tag_consistency, theorem_tag,
)
from frogsim.laws import Bernoulli, Constant, GeometricNumber, Poisson
from frogsim.special import DomainError, beta_function


def test_alpha0_bracket_and_residual():
    a = alpha0(1.0)
    assert 1.75 <= a <= 1.87
    # bracket from the closed forms B(1, 1/2) = 2 and B(2, 1/2) = 4/3
    assert beta_function(1.0, 0.5) > math.sqrt(2) > beta_function(2.0, 0.5)
    for m in (0.3, 1.0, 2.0, 10.0, 1e4):
        assert abs(beta_function(alpha0(m), 0.5) - m * math.sqrt(2)) <= 1e-5


def test_alpha0_special_values():
    assert alpha0(math.inf) == 0.0
    assert alpha0(1) > alpha0(2) > alpha0(10)
    with pytest.raises(DomainError):
        alpha0(0.0)
    with pytest.raises(DomainError):
        alpha0(-2.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 100.0), st.floats(0.05, 100.0))
def test_alpha0_monotone(m1, m2):
    lo, hi = sorted((m1, m2))
    assert alpha0(lo) >= alpha0(hi)


def test_scaled_tail_regimes():
    grid = [10**k for k in range(2, 6)]
    c = scaled_tail_curve(1.0, 0.75, grid)
    assert np.all(np.diff(c.values) < 0) and c.values[-1] < 0.01
    assert c.trend == "decreasing"
    c = scaled_tail_curve(1.0, 0.25, grid)
    assert np.all(np.diff(c.values) > 0) and c.values[-1] > 10
    assert c.trend == "increasing"
    c = scaled_tail_curve(1.0, 0.5, [10**6])
    assert c.values[0] == pytest.approx(math.sqrt(2) / 2, rel=0.05)
    with pytest.raises(ValueError):
        scaled_tail_curve(1.0, 0.5, [0, 10])


def test_criterion_verdicts():
    assert criterion_check(1.0, 0.25, Poisson(3.0)).verdict == SURVIVAL_MET
    assert criterion_check(1.0, 0.25, Bernoulli(0.1)).verdict == SURVIVAL_MET
    assert criterion_check(1.0, 0.75, Constant(1)).verdict == EXTINCTION_MET
    r = criterion_check(1.0, 0.5, Constant(1))
    assert r.verdict == INDETERMINATE
    assert any("does not prove extinction" in n for n in r.notes)
    assert r.survival_threshold == 1.0 and r.extinction_threshold == 0.5
    assert criterion_check(5.0, 0.5, Constant(1)).verdict == SURVIVAL_MET


def test_infinite_mean_thresholds():
    r = criterion_check(1.0, 0.75, GeometricNumber(1.0), [100, 1000])
    assert r.survival_threshold == 0.0 and r.extinction_threshold == 0.0
    assert r.verdict == INDETERMINATE  # the curve decays to 0, so its liminf is not > 0
    assert any("infinite" in n for n in r.notes)
    assert criterion_check(1.0, 0.25, GeometricNumber(1.0), [100, 1000]).verdict == SURVIVAL_MET


def test_theorem_tags():
    assert theorem_tag(1.0, 0.75, Constant(1)) == THEOREM_EXTINCT
    assert theorem_tag(1.0, 0.25, Constant(1)) == THEOREM_SURVIVE
    assert theorem_tag(1.0, 0.5, Constant(1)) == UNKNOWN
    assert theorem_tag(2.0, 0.5, Constant(1)) == THEOREM_SURVIVE
    assert theorem_tag(0.1, 0.5, GeometricNumber(1.0)) == THEOREM_SURVIVE
    assert theorem_tag(1.0, 0.75, GeometricNumber(1.0)) == UNKNOWN
    assert theorem_tag(1.0, 0.25, Constant(0)) == THEOREM_EXTINCT


def test_phase_diagram_small():
    cells = phase_diagram([1.0], [0.25, 0.75], Constant(1), [100, 300], 200, master_seed=1)
    assert [(c.beta, c.window) for c in cells] == [(0.25, 100), (0.25, 300), (0.75, 100), (0.75, 300)]
    assert cells[0].tag == THEOREM_SURVIVE and cells[2].tag == THEOREM_EXTINCT
    assert cells[3].estimate <= cells[2].estimate
    assert tag_consistency(cells, min_window=100) == []
    again = phase_diagram([1.0], [0.25, 0.75], Constant(1), [100, 300], 200, master_seed=1, workers=3)
    assert again == cells
    with pytest.raises(ValueError):
        phase_diagram([], [0.5])
