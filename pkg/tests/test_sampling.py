"""Adaptive period-range curriculum: expansion, gated contraction, clamps."""

import numpy as np
import pytest

from psd.nn import ConfigurationError
from psd.sampling import SamplingBounds, update_bounds

T = 200
HIGH = 0.95 * T   # above alpha*T = 180
LOW = 0.2 * T     # below beta*T = 80
MID = 0.6 * T     # between the thresholds


def bounds(**kw):
    return SamplingBounds(L_min=10, L_max=20, **kw)


def test_validation():
    with pytest.raises(ConfigurationError):
        SamplingBounds(L_min=3, L_max=10)  # below the floor of 5
    with pytest.raises(ConfigurationError):
        SamplingBounds(L_min=12, L_max=10)
    with pytest.raises(ConfigurationError):
        SamplingBounds(L_min=5, L_max=10, alpha=0.3, beta=0.4)


def test_training_values_cover_both_bounds():
    b = SamplingBounds(L_min=5, L_max=20)
    assert b.training_values(4) == [5, 10, 15, 20]
    assert SamplingBounds(L_min=10, L_max=10).training_values(4) == [10]
    assert SamplingBounds(L_min=5, L_max=6).training_values(4) == [5, 6]


def test_high_return_expands_both_bounds():
    b = bounds()
    update_bounds(b, r_min=HIGH, r_max=HIGH, T=T)
    assert (b.L_min, b.L_max) == (9, 21)
    assert b.updated_once_min and b.updated_once_max


def test_middling_return_changes_nothing():
    b = bounds()
    update_bounds(b, r_min=MID, r_max=MID, T=T)
    assert (b.L_min, b.L_max) == (10, 20)
    assert not b.updated_once_min and not b.updated_once_max


def test_contraction_requires_a_prior_expansion():
    b = bounds()
    update_bounds(b, r_min=LOW, r_max=LOW, T=T)
    assert (b.L_min, b.L_max) == (10, 20)  # gated: never expanded yet

    b = bounds(updated_once_min=True, updated_once_max=True)
    update_bounds(b, r_min=LOW, r_max=LOW, T=T)
    assert (b.L_min, b.L_max) == (11, 19)


def test_gating_is_per_bound():
    b = bounds(updated_once_max=True)
    update_bounds(b, r_min=LOW, r_max=LOW, T=T)
    assert (b.L_min, b.L_max) == (10, 19)


def test_min_bound_clamps_at_floor():
    b = SamplingBounds(L_min=5, L_max=10)
    update_bounds(b, r_min=HIGH, r_max=MID, T=T)
    assert b.L_min == 5
    assert b.updated_once_min  # the attempt still counts as an update


def test_crossing_update_is_discarded():
    b = SamplingBounds(L_min=10, L_max=10,
                       updated_once_min=True, updated_once_max=True)
    # min would move to 11 while max moves to 9: discard, keep flags
    update_bounds(b, r_min=LOW, r_max=LOW, T=T)
    assert (b.L_min, b.L_max) == (10, 10)


def test_exact_thresholds_are_inactive():
    # rules use strict inequalities on alpha*T and beta*T
    b = bounds(updated_once_min=True, updated_once_max=True)
    update_bounds(b, r_min=0.9 * T, r_max=0.4 * T, T=T)
    assert (b.L_min, b.L_max) == (10, 20)


def test_repeated_expansion_is_monotone():
    b = SamplingBounds(L_min=10, L_max=10)
    maxima = []
    for _ in range(5):
        update_bounds(b, r_min=MID, r_max=HIGH, T=T)
        maxima.append(b.L_max)
    assert maxima == [11, 12, 13, 14, 15]


def test_step_size_n():
    b = SamplingBounds(L_min=10, L_max=20, N=3)
    update_bounds(b, r_min=HIGH, r_max=HIGH, T=T)
    assert (b.L_min, b.L_max) == (7, 23)
