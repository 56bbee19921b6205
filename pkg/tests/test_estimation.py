from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from safescout.estimation import (CellStatistics, EstimateSnapshot, c_measure, estimate,
                                  estimation_error, record_observation)


def test_first_success():
    stats = record_observation(CellStatistics(), 1)
    assert estimate(stats) == 1.0


def test_update_from_three_visits():
    stats = CellStatistics(visits=3, successes=2)
    record_observation(stats, 0)
    assert estimate(stats) == 0.5


def test_table1_cell8_ratio():
    stats = CellStatistics()
    for y in [1] * 59 + [0] * 21:
        stats.record(y)
    assert estimate(stats) == 0.7375
    assert c_measure(estimate(stats)) == pytest.approx(0.19359375, abs=1e-15)


def test_unvisited_prior():
    assert estimate(CellStatistics()) == 0.5


def test_ratio_echo():
    assert estimate(CellStatistics(visits=10, successes=9)) == 0.9
    assert estimate(CellStatistics(visits=40, successes=35)) == 0.875


def test_c_measure_values():
    assert c_measure(0.5) == 0.25
    assert c_measure(0.0) == 0.0
    with pytest.raises(ValueError):
        c_measure(1.2)


def test_estimation_error():
    assert estimation_error(0.5, 0.5) == 0.0
    assert estimation_error(0.875, 0.9) == pytest.approx(-0.025)
    assert estimation_error(1, 0) == 1


def test_history_window_is_bounded():
    stats = CellStatistics(n_delta=4)
    for y in [1, 0] * 10:
        stats.record(y)
    assert len(stats.history) == 5
    assert stats.history[-1] == 0.5


def test_freeze_records_c():
    stats = CellStatistics()
    for y in (1, 1, 0, 1):
        stats.record(y)
    stats.freeze(17)
    assert stats.eliminated_at == 17
    assert stats.frozen_c == 0.75 * 0.25


def test_bad_observation():
    with pytest.raises(ValueError):
        CellStatistics().record(2)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=300))
def test_estimate_is_exact_ratio(ys):
    stats = CellStatistics(n_delta=10)
    for y in ys:
        stats.record(y)
    assert stats.successes <= stats.visits
    assert estimate(stats) == float(Fraction(sum(ys), len(ys)))
    assert 0.0 <= c_measure(estimate(stats)) <= 0.25


@given(st.floats(0.0, 1.0))
def test_c_symmetry(p):
    assert c_measure(p) == pytest.approx(c_measure(1.0 - p), abs=1e-15)


def test_snapshot_validation():
    snap = EstimateSnapshot(3, [0.5, 1.0])
    assert np.array_equal(snap.as_array(), [0.5, 1.0])
    with pytest.raises(ValueError):
        EstimateSnapshot(1, [1.5])
