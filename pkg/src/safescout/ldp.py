"""Bernoulli large-deviations quantities.

``rate_function(eps, p)`` is the Kullback-Leibler divergence between
Bernoulli(eps) and Bernoulli(p): the exponential rate at which the empirical
mean of Bernoulli(p) draws hits ``eps``. Rates are returned nonnegative; plot
helpers negate them.
"""
import csv
import io
from dataclasses import dataclass

import numpy as np

from ._validation import check_open_unit, check_probabilities, check_simplex
from .markov import build_reduced, check_policy, simulate_observation_sums, stationary
from .oracle import make_rng


def rate_function(eps, p):
    eps = check_open_unit(eps, "eps")
    p = check_open_unit(p, "p")
    return eps * np.log(eps / p) + (1.0 - eps) * np.log((1.0 - eps) / (1.0 - p))


def effective_p(p_vec, pi_vec):
    """Stationary-weighted success probability ``sum_l p_l * pi_l``."""
    p = check_probabilities(p_vec, "p_vec")
    pi = check_simplex(pi_vec, "pi_vec")
    if len(p) != len(pi):
        raise ValueError("p_vec and pi_vec lengths differ")
    return float(p @ pi)


def rate_bar(eps, p_vec, pi_vec):
    p_eff = effective_p(p_vec, pi_vec)
    if not 0.0 < p_eff < 1.0:
        raise ValueError(f"effective probability {p_eff} is degenerate")
    return rate_function(eps, p_eff)


def chernoff_theta_star(eps, p):
    """Maximizer over theta of ``theta * eps - log(p * e^theta + 1 - p)``."""
    eps = check_open_unit(eps, "eps")
    p = check_open_unit(p, "p")
    return float(np.log(eps * (1.0 - p) / (p * (1.0 - eps))))


def chernoff_exponent(theta, eps, p):
    return theta * eps - np.log(np.exp(theta) * p + 1.0 - p)


@dataclass(frozen=True)
class RateCurve:
    epsilon: float
    p: np.ndarray
    neg_rate: np.ndarray

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["p", "neg_rate"])
        for p, v in zip(self.p, self.neg_rate):
            writer.writerow([f"{p:.12g}", f"{v:.12g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text, epsilon):
        rows = list(csv.reader(io.StringIO(text)))
        if rows[0] != ["p", "neg_rate"]:
            raise ValueError("unexpected rate curve header")
        data = np.array(rows[1:], dtype=float)
        return cls(float(epsilon), data[:, 0], data[:, 1])


def rate_curve(eps, n_points):
    """``-I(eps, p)`` on the grid ``p_i = (i + 1/2) / n_points``."""
    eps = check_open_unit(eps, "eps")
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    grid = (np.arange(n_points) + 0.5) / n_points
    values = -(eps * np.log(eps / grid) + (1.0 - eps) * np.log((1.0 - eps) / (1.0 - grid)))
    # exact zero where the grid hits eps
    values[np.isclose(grid, eps, rtol=0.0, atol=1e-15)] = 0.0
    return RateCurve(eps, grid, values)


@dataclass(frozen=True)
class IndependenceReport:
    """Finite-n evidence for asymptotic independence; makes no pass/fail call."""

    horizon: int
    trials: int
    epsilon: float
    p_eff: float
    mean_fraction: float
    std_error: float
    empirical_log_prob: float
    predicted_log_prob: float


def asymptotic_independence_diagnostic(policy, p_vec, horizon, trials, seed, eps=0.05,
                                       initial=None):
    """Simulate ``trials`` paths of length ``horizon`` and compare with the effective Bernoulli model.

    ``empirical_log_prob`` is ``(1/n) log P(|S_n/n - p_eff| >= eps)`` from the
    simulated paths (``-inf`` if the event never occurred);
    ``predicted_log_prob`` is minus the smaller one-sided rate.
    """
    policy = check_policy(policy)
    p = check_probabilities(p_vec, "p_vec")
    if horizon < 100 or trials < 1000:
        raise ValueError("diagnostic needs horizon >= 100 and trials >= 1000")
    pi_bar = stationary(build_reduced(policy, p))
    p_eff = effective_p(p, pi_bar)
    sums = simulate_observation_sums(policy, p, horizon, trials, make_rng(seed), initial)
    frac = sums / horizon
    hits = np.count_nonzero(np.abs(frac - p_eff) >= eps)
    with np.errstate(divide="ignore"):
        empirical = float(np.log(hits / trials) / horizon)
    rates = [rate_function(x, p_eff) for x in (p_eff - eps, p_eff + eps)
             if 0.0 < x < 1.0 and 0.0 < p_eff < 1.0]
    predicted = -min(rates) if rates else -np.inf
    return IndependenceReport(horizon, trials, float(eps), p_eff, float(frac.mean()),
                              float(frac.std(ddof=1) / np.sqrt(trials)), empirical,
                              float(predicted))
