import numpy as np
import pytest
from hypothesis import given, strategies as st

from safescout.ldp import (RateCurve, asymptotic_independence_diagnostic, chernoff_exponent,
                           chernoff_theta_star, effective_p, rate_bar, rate_curve,
                           rate_function)
from safescout.markov import random_policy, simulate_trajectory, uniform_policy, vertex_policy

interior = st.floats(0.001, 0.999)


def test_rate_zero_at_eps():
    assert rate_function(0.3, 0.3) == 0.0


def test_rate_known_value():
    # 0.5 ln(0.5/0.9) + 0.5 ln(0.5/0.1) = 0.5 ln(25/9)
    assert rate_function(0.5, 0.9) == pytest.approx(np.log(5 / 3), abs=1e-12)
    assert rate_function(0.5, 0.9) == pytest.approx(0.510826, abs=1e-6)


def test_rate_half_symmetry_value():
    assert rate_function(0.5, 0.2) == pytest.approx(0.223144, abs=1e-6)
    assert rate_function(0.5, 0.8) == pytest.approx(rate_function(0.5, 0.2), abs=1e-15)


@pytest.mark.parametrize("eps,p", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0)])
def test_rate_rejects_boundary(eps, p):
    with pytest.raises(ValueError):
        rate_function(eps, p)


@given(interior, interior)
def test_rate_nonnegative(eps, p):
    value = rate_function(eps, p)
    assert value >= -1e-15
    if abs(eps - p) > 1e-6:
        assert value > 0


def test_rate_is_bernoulli_kl():
    from scipy.special import rel_entr
    for eps, p in [(0.2, 0.7), (0.9, 0.4), (0.55, 0.5)]:
        kl = rel_entr(eps, p) + rel_entr(1 - eps, 1 - p)
        assert rate_function(eps, p) == pytest.approx(kl, rel=1e-12)


def test_effective_p():
    assert effective_p([0.2, 0.8], [0.5, 0.5]) == 0.5
    assert effective_p([0.1, 0.2, 0.7], [0, 0, 1]) == 0.7
    table1 = [0.9, 0.84, 0.58, 0.79, 0.6, 0.75, 0.54, 0.72, 0.56]
    assert effective_p(table1, np.full(9, 1 / 9)) == pytest.approx(0.697778, abs=1e-6)
    with pytest.raises(ValueError):
        effective_p([0.2, 0.8], [0.6, 0.6])


def test_rate_bar():
    assert rate_bar(0.5, [0.9, 0.1], [0.5, 0.5]) == 0.0
    assert rate_bar(0.5, [0.9, 0.3], [0.0, 1.0]) == rate_function(0.5, 0.3)
    with pytest.raises(ValueError):
        rate_bar(0.5, [1.0, 1.0], [0.5, 0.5])


def test_theta_star_values():
    assert chernoff_theta_star(0.4, 0.4) == 0.0
    assert chernoff_theta_star(0.75, 0.5) == pytest.approx(np.log(3), abs=1e-12)
    assert chernoff_theta_star(0.3, 0.5) < 0 < chernoff_theta_star(0.6, 0.5)


@pytest.mark.parametrize("eps,p", [(0.75, 0.5), (0.3, 0.6), (0.9, 0.2)])
def test_theta_star_matches_grid(eps, p):
    grid = np.arange(-10.0, 10.0 + 1e-12, 1e-4)
    best = grid[np.argmax(chernoff_exponent(grid, eps, p))]
    assert chernoff_theta_star(eps, p) == pytest.approx(best, abs=1e-3)
    # the maximum value equals the rate
    assert chernoff_exponent(chernoff_theta_star(eps, p), eps, p) == pytest.approx(
        rate_function(eps, p), abs=1e-12)


def test_rate_curve_shape():
    curve = rate_curve(0.5, 99)
    assert len(curve.p) == 99
    assert curve.neg_rate[49] == 0.0 and curve.p[49] == 0.5
    np.testing.assert_allclose(curve.neg_rate, curve.neg_rate[::-1], atol=1e-12)
    i3 = np.argmin(np.abs(curve.p - 0.3))
    i7 = np.argmin(np.abs(curve.p - 0.7))
    assert curve.neg_rate[i3] == pytest.approx(curve.neg_rate[i7], abs=1e-12)
    assert np.all(curve.neg_rate <= 0.0) and np.all((curve.p > 0) & (curve.p < 1))


def test_rate_curve_peaks_at_eps():
    curve = rate_curve(0.25, 10)
    assert curve.p[np.argmax(curve.neg_rate)] == 0.25
    curve = rate_curve(0.75, 200)
    assert curve.p[np.argmax(curve.neg_rate)] == pytest.approx(0.75, abs=1 / 200)


def test_rate_curve_csv_round_trip():
    curve = rate_curve(0.25, 20)
    text = curve.to_csv()
    assert text.splitlines()[0] == "p,neg_rate"
    back = RateCurve.from_csv(text, 0.25)
    np.testing.assert_allclose(back.neg_rate, curve.neg_rate, rtol=1e-11, atol=1e-15)


def test_rate_curve_rejects_too_few_points():
    with pytest.raises(ValueError):
        rate_curve(0.5, 1)


def test_monotonicity_transfer():
    p = np.linspace(0.01, 0.99, 99)
    c = p * (1 - p)
    neg = np.array([-rate_function(0.5, x) for x in p])
    order_c = np.argsort(c, kind="stable")
    assert np.all(np.diff(neg[order_c]) >= -1e-12)


def test_diagnostic_iid_when_all_p_equal():
    rep = asymptotic_independence_diagnostic(uniform_policy(3), [0.4] * 3, 200, 2000, seed=1)
    band = 4 * np.sqrt(0.4 * 0.6 / (200 * 2000))
    assert abs(rep.mean_fraction - 0.4) < band
    assert rep.p_eff == pytest.approx(0.4)


def test_diagnostic_random_policy_against_long_trajectory():
    rng = np.random.default_rng(7)
    policy = random_policy(3, rng)
    p = [0.2, 0.5, 0.8]
    traj = simulate_trajectory(policy, p, 400_000, rng)
    ergodic_mean = traj[:, 1].mean()
    rep = asymptotic_independence_diagnostic(policy, p, 2000, 20000, seed=3)
    assert abs(rep.mean_fraction - rep.p_eff) < 0.01
    assert abs(ergodic_mean - rep.p_eff) < 0.01
    assert rep.empirical_log_prob <= 0.0


def test_diagnostic_vertex_policy_reduces_to_iid():
    rep = asymptotic_independence_diagnostic(vertex_policy(3, 2), [0.1, 0.5, 0.85], 300, 2000,
                                             seed=2, initial=[0, 0, 1])
    assert rep.p_eff == pytest.approx(0.85)
    assert abs(rep.mean_fraction - 0.85) < 4 * np.sqrt(0.85 * 0.15 / (300 * 2000))


def test_diagnostic_rejects_reducible_policy():
    from safescout.exceptions import ReducibleChainError
    identity = np.zeros((2, 2, 2))
    identity[0, :, 0] = identity[1, :, 1] = 1.0
    with pytest.raises(ReducibleChainError):
        asymptotic_independence_diagnostic(identity, [0.3, 0.6], 200, 1000, seed=0)


def test_chernoff_bound_nondegenerate_case():
    rng = np.random.default_rng(5)
    n, p, eps = 200, 0.5, 0.55
    sums = rng.binomial(n, p, size=100_000)
    prob = np.mean(sums >= n * eps)
    assert prob > 0
    assert np.log(prob) / n <= -rate_function(eps, p) + 0.05
