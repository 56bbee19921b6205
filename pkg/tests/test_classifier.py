import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from safescout.classifier import (GAP, MEDIAN, SAFE, ClassificationResult, classify,
                                  threshold, true_safe_set)

TABLE1_SORTED_C = [0.0819, 0.1275, 0.16, 0.18109375, 0.19359375, 0.234375, 0.244375,
                   0.249375, 0.249375]


def test_table1_threshold(table1_final):
    c = table1_final * (1 - table1_final)
    np.testing.assert_allclose(np.sort(c), TABLE1_SORTED_C, atol=1e-15)
    t = threshold(c)
    assert t.c_threshold == pytest.approx(0.1936, abs=5e-5)
    assert t.c_threshold == np.sort(c)[4]
    # largest adjacent gap is at sorted position 1, outside [3, 7]
    assert t.k_star == 1 and t.route == MEDIAN


def test_table1_labels(table1_final):
    res = classify(table1_final * (1 - table1_final), table1_final)
    assert res.safe_set == {0, 1, 3, 5, 7}
    assert [k for k, lab in enumerate(res.labels) if lab != SAFE] == [2, 4, 6, 8]


def test_gap_route_in_middle():
    t = threshold([0.01, 0.02, 0.03, 0.20])
    assert (t.k_star, t.route, t.c_threshold) == (3, GAP, 0.03)


def test_gap_route_at_quartile_boundary():
    t = threshold([0.01, 0.18, 0.19, 0.20])
    assert (t.k_star, t.route, t.c_threshold) == (1, GAP, 0.01)


def test_lower_median_for_even_m():
    # max gap at position 5 of 6 -> outside [2, 5]? ceil(6/4)=2, ceil(18/4)=5 -> inside
    t = threshold([0.0, 0.01, 0.02, 0.03, 0.04, 0.2])
    assert t.route == GAP and t.k_star == 5
    t = threshold([0.0, 0.1, 0.11, 0.12, 0.13, 0.14, 0.15, 0.16])
    # k*=1 < ceil(8/4)=2 -> lower median (4th value)
    assert t.route == MEDIAN and t.c_threshold == 0.12


def test_gap_ties_take_lowest_position():
    t = threshold([0.0, 0.0625, 0.125, 0.1875, 0.25])
    assert t.k_star == 1


def test_all_unsafe_when_estimates_below_half():
    p = np.full(5, 0.4)
    assert classify(p * (1 - p), p).safe_set == frozenset()


def test_symmetric_pair():
    p = np.array([0.9, 0.1])
    res = classify(p * (1 - p), p)
    assert res.c_threshold == pytest.approx(0.09)
    assert res.safe_set == {0}


def test_errors():
    with pytest.raises(ValueError):
        threshold([0.1])
    with pytest.raises(ValueError):
        classify([0.1, 0.2], [0.5])


def test_true_safe_set_table1(table1_true_p):
    assert true_safe_set(table1_true_p) == {0, 1, 3, 5, 7}


def test_result_dict_round_trip(table1_final):
    res = classify(table1_final * (1 - table1_final), table1_final)
    assert ClassificationResult.from_dict(res.to_dict()) == res
    assert res.to_dict()["safe_set"] == [1, 2, 4, 6, 8]


p_lists = st.lists(st.floats(0.0, 1.0), min_size=2, max_size=15)


@settings(max_examples=200)
@given(p_lists, st.integers(0, 2**32 - 1))
def test_permutation_invariance(p, seed):
    p = np.array(p)
    c = p * (1 - p)
    perm = np.random.default_rng(seed).permutation(len(p))
    a, b = classify(c, p), classify(c[perm], p[perm])
    assert a.c_threshold == b.c_threshold
    assert [a.labels[k] for k in perm] == list(b.labels)


@settings(max_examples=200)
@given(p_lists, st.data())
def test_reflection_keeps_threshold(p, data):
    p = np.array(p)
    k = data.draw(st.integers(0, len(p) - 1))
    q = p.copy()
    q[k] = 1 - q[k]
    c_p, c_q = p * (1 - p), p * (1 - p)
    a, b = classify(c_p, p), classify(c_q, q)
    assert a.c_threshold == b.c_threshold
    for j in range(len(p)):
        if j != k:
            assert a.labels[j] == b.labels[j]


@given(p_lists)
def test_threshold_is_attained_and_min_passes(p):
    c = np.array(p) * (1 - np.array(p))
    t = threshold(c)
    assert t.c_threshold in c
    assert np.any(c <= t.c_threshold)
    assert np.all(np.diff(c[t.sort_order]) >= 0)
    m = len(c)
    if t.route == GAP:
        assert int(np.ceil(m / 4)) <= t.k_star <= int(np.ceil(3 * m / 4))
    else:
        assert t.c_threshold == np.sort(c)[(m - 1) // 2]
