"""Exact evaluation of the finite-horizon cost ``E[(S/N)(1 - S/N)]`` on tiny instances.

``S`` is the number of 1-observations in a horizon of ``N`` observations.
Stationary policies are evaluated by a forward recursion over (joint state,
running count). The greedy rule is evaluated exactly by recursion over the
learner's sufficient statistics and by Monte Carlo.
"""
import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import check_probabilities, check_simplex
from .estimation import UNVISITED_PRIOR
from .exceptions import BudgetExceededError
from .markov import build_joint, check_policy
from .oracle import make_rng

MAX_HORIZON = 14
MAX_CELLS = 3
TIE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class HorizonSpec:
    """Horizon ``N``, true parameters and the initial law of the first (cell, observation) pair.

    ``initial`` may be a distribution over cells (the first observation is
    then drawn with the cell's ``p``) or over the ``2m`` joint states in joint
    order. ``None`` means a uniform first cell.
    """

    N: int
    p_vec: np.ndarray
    initial: np.ndarray = None

    def __post_init__(self):
        p = check_probabilities(self.p_vec, "p_vec")
        m = len(p)
        if self.N < 1:
            raise ValueError("horizon must be positive")
        if self.N > MAX_HORIZON or m > MAX_CELLS:
            raise BudgetExceededError(
                f"exact evaluation limited to N <= {MAX_HORIZON} and m <= {MAX_CELLS}")
        init = np.full(m, 1.0 / m) if self.initial is None else check_simplex(self.initial, "initial")
        if len(init) == m:
            init = np.concatenate([init * p, init * (1.0 - p)])
        elif len(init) != 2 * m:
            raise ValueError("initial must have length m or 2m")
        object.__setattr__(self, "p_vec", p)
        object.__setattr__(self, "initial", init)

    @property
    def m(self):
        return len(self.p_vec)


def stage_costs(y_sequence):
    """Per-stage pieces of ``N*S - S^2``; they sum exactly to it."""
    y = [int(v) for v in y_sequence]
    N = len(y)
    if N == 0:
        raise ValueError("y_sequence is empty")
    costs = []
    running = 0
    for yi in y:
        costs.append(N * yi - yi * yi - 2 * yi * running)
        running += yi
    return costs


def _final_cost(N):
    S = np.arange(N + 1)
    return (S / N) * (1.0 - S / N)


def exact_expected_cost(policy, spec):
    policy = check_policy(policy)
    if policy.shape[0] != spec.m:
        raise ValueError("policy and spec disagree on the number of cells")
    m, N = spec.m, spec.N
    P = build_joint(policy, spec.p_vec)
    gain = np.concatenate([np.ones(m, dtype=int), np.zeros(m, dtype=int)])
    # dist[state, S] after each observation
    dist = np.zeros((2 * m, N + 1))
    dist[np.arange(2 * m), gain] = spec.initial
    for _ in range(N - 1):
        moved = P.T @ dist
        new = np.zeros_like(dist)
        new[:m, 1:] = moved[:m, :-1]
        new[m:, :] = moved[m:, :]
        dist = new
    return float(dist.sum(axis=0) @ _final_cost(N))


def deterministic_policies(m):
    """Every map (cell, observation) -> next cell, as policy tables."""
    for choice in itertools.product(range(m), repeat=2 * m):
        policy = np.zeros((m, 2, m))
        for idx, target in enumerate(choice):
            policy[idx // 2, idx % 2, target] = 1.0
        yield policy


def optimal_stationary_cost(spec):
    """Best deterministic stationary policy by exhaustive search (first minimizer kept)."""
    best_policy, best_cost = None, np.inf
    for policy in deterministic_policies(spec.m):
        cost = exact_expected_cost(policy, spec)
        if cost < best_cost:
            best_policy, best_cost = policy, cost
    return best_policy, best_cost


def _greedy_targets(succ, vis):
    est = [s / v if v else UNVISITED_PRIOR for s, v in zip(succ, vis)]
    c = [e * (1.0 - e) for e in est]
    low = min(c)
    return [k for k, ck in enumerate(c) if ck - low <= TIE_TOLERANCE]


def greedy_expected_cost(spec):
    """Exact expected cost of the greedy rule with uniform tie-breaking.

    No cell can be eliminated within the supported horizons, so the rule is
    the plain argmin of ``p(1 - p)`` over running estimates.
    """
    m, N, p = spec.m, spec.N, spec.p_vec.tolist()
    final = _final_cost(N)

    @lru_cache(maxsize=None)
    def after_observation(t, succ, vis):
        if t == N:
            return final[sum(succ)]
        targets = _greedy_targets(succ, vis)
        return sum(at_cell(t + 1, k, succ, vis) for k in targets) / len(targets)

    def observed(t, cell, y, succ, vis):
        succ = succ[:cell] + (succ[cell] + y,) + succ[cell + 1:]
        vis = vis[:cell] + (vis[cell] + 1,) + vis[cell + 1:]
        return after_observation(t, succ, vis)

    @lru_cache(maxsize=None)
    def at_cell(t, cell, succ, vis):
        total = 0.0
        if p[cell] > 0.0:
            total += p[cell] * observed(t, cell, 1, succ, vis)
        if p[cell] < 1.0:
            total += (1.0 - p[cell]) * observed(t, cell, 0, succ, vis)
        return total

    zero = (0,) * m
    total = 0.0
    for state, prob in enumerate(spec.initial):
        if prob > 0.0:
            cell, y = (state, 1) if state < m else (state - m, 0)
            total += prob * observed(1, cell, y, zero, zero)
    return float(total)


def simulate_greedy_costs(spec, runs, rng):
    """Realized ``(S/N)(1 - S/N)`` of ``runs`` independent greedy episodes."""
    m, N, p = spec.m, spec.N, spec.p_vec
    states = rng.choice(2 * m, size=runs, p=spec.initial)
    cells = np.where(states < m, states, states - m)
    y = (states < m).astype(np.int64)
    succ = np.zeros((runs, m), dtype=np.int64)
    vis = np.zeros((runs, m), dtype=np.int64)
    rows = np.arange(runs)
    succ[rows, cells] += y
    vis[rows, cells] += 1
    for _ in range(N - 1):
        est = np.where(vis > 0, succ / np.maximum(vis, 1), UNVISITED_PRIOR)
        c = est * (1.0 - est)
        tied = c - c.min(axis=1, keepdims=True) <= TIE_TOLERANCE
        keys = np.where(tied, rng.random((runs, m)), -1.0)
        cells = keys.argmax(axis=1)
        y = (rng.random(runs) < p[cells]).astype(np.int64)
        succ[rows, cells] += y
        vis[rows, cells] += 1
    S = succ.sum(axis=1)
    return (S / N) * (1.0 - S / N)


@dataclass(frozen=True)
class GreedyGapReport:
    N: int
    p_vec: tuple
    runs: int
    optimal_cost: float
    greedy_exact: float
    greedy_mean: float
    greedy_std_error: float

    @property
    def gap(self):
        return self.greedy_mean - self.optimal_cost

    @property
    def exact_gap(self):
        return self.greedy_exact - self.optimal_cost

    @property
    def within_band(self):
        """Greedy does not beat the stationary optimum beyond 3 standard errors."""
        return self.gap >= -3.0 * self.greedy_std_error

    def to_dict(self):
        return {"N": self.N, "p_vec": list(self.p_vec), "runs": self.runs,
                "optimal_cost": self.optimal_cost, "greedy_exact": self.greedy_exact,
                "greedy_mean": self.greedy_mean, "greedy_std_error": self.greedy_std_error,
                "gap": self.gap, "exact_gap": self.exact_gap, "within_band": self.within_band}


def greedy_gap(spec, runs, seed):
    _, optimal = optimal_stationary_cost(spec)
    costs = simulate_greedy_costs(spec, runs, make_rng(seed))
    se = float(costs.std(ddof=1) / np.sqrt(runs)) if runs > 1 else float("inf")
    return GreedyGapReport(spec.N, tuple(spec.p_vec.tolist()), int(runs), optimal,
                           greedy_expected_cost(spec), float(costs.mean()), se)
