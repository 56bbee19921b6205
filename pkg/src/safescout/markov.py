"""Joint (cell, observation) chain, its cell-marginal chain, and stationary solves.

A policy table is an array ``policy[k, u, l]``: the probability of moving to
cell ``l`` after observing ``u`` at cell ``k``. Joint states are ordered with
the observation-1 block first::

    (0, 1), (1, 1), ..., (m-1, 1), (0, 0), (1, 0), ..., (m-1, 0)

The joint transition from ``(k, u)`` to ``(l, v)`` moves to ``l`` first and
then observes there, so its probability is ``policy[k, u, l] * p_l^v``.
"""
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import linalg

from ._validation import SIMPLEX_TOL, check_open_unit, check_probabilities, check_stochastic
from .exceptions import ReducibleChainError

NULL_TOL = 1e-9


def check_policy(policy, tol=SIMPLEX_TOL):
    policy = np.asarray(policy, dtype=float)
    if policy.ndim != 3 or policy.shape[1] != 2 or policy.shape[0] != policy.shape[2]:
        raise ValueError(f"policy must have shape (m, 2, m), got {policy.shape}")
    if np.any(policy < 0.0) or np.any(policy > 1.0):
        raise ValueError("policy entries must lie in [0, 1]")
    if np.max(np.abs(policy.sum(axis=2) - 1.0)) > tol:
        raise ValueError("every policy row pi(k, u)[.] must sum to 1")
    return policy


def uniform_policy(m):
    return np.full((m, 2, m), 1.0 / m)


def vertex_policy(m, target):
    policy = np.zeros((m, 2, m))
    policy[:, :, target] = 1.0
    return policy


def observation_independent_policy(matrix):
    matrix = check_stochastic(matrix)
    return np.repeat(matrix[:, None, :], 2, axis=1)


def random_policy(m, rng, concentration=1.0):
    return rng.dirichlet(np.full(m, concentration), size=(m, 2))


def joint_index(cell, observation, m):
    return cell if observation == 1 else m + cell


def build_joint(policy, p_vec):
    policy = check_policy(policy)
    p = check_probabilities(p_vec, "p_vec")
    m = policy.shape[0]
    if len(p) != m:
        raise ValueError("p_vec length does not match the policy")
    # rows: (k, u) in joint order; columns: (l, v) in joint order
    by_obs = np.concatenate([policy[:, 1, :], policy[:, 0, :]], axis=0)
    return np.concatenate([by_obs * p, by_obs * (1.0 - p)], axis=1)


def build_reduced(policy, p_vec):
    policy = check_policy(policy)
    p = check_probabilities(p_vec, "p_vec")
    if len(p) != policy.shape[0]:
        raise ValueError("p_vec length does not match the policy")
    return p[:, None] * policy[:, 1, :] + (1.0 - p)[:, None] * policy[:, 0, :]


def stationary(matrix, tol=1e-12, max_power_iter=100_000):
    """Unique stationary distribution of a row-stochastic matrix.

    Solves ``(M^T - I) pi = 0`` together with ``sum(pi) = 1`` directly and falls
    back to power iteration on the lazy chain if the residual is above ``tol``.
    Raises :class:`ReducibleChainError` when the stationary distribution is
    not unique.
    """
    P = check_stochastic(matrix)
    n = P.shape[0]
    if n == 1:
        return np.ones(1)
    A = P.T - np.eye(n)
    singular = linalg.svdvals(A)
    nullity = int(np.count_nonzero(singular <= NULL_TOL))
    if nullity > 1:
        raise ReducibleChainError(
            f"stationary distribution is not unique ({nullity} null directions)")
    B = np.vstack([A, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi = linalg.lstsq(B, b)[0]
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if np.max(np.abs(pi @ P - pi)) <= tol:
        return pi
    lazy = 0.5 * (P + np.eye(n))
    for _ in range(max_power_iter):
        pi = pi @ lazy
        pi /= pi.sum()
        if np.max(np.abs(pi @ P - pi)) <= tol:
            return pi
    raise ReducibleChainError("power iteration did not converge")


def stationary_residual(matrix, pi):
    matrix = np.asarray(matrix, dtype=float)
    return float(np.max(np.abs(pi @ matrix - pi)))


@dataclass(frozen=True)
class LiftReport:
    reduced_stationary: np.ndarray
    joint_stationary: np.ndarray
    predicted_joint: np.ndarray
    max_deviation: float
    tol: float

    @property
    def ok(self):
        return self.max_deviation <= self.tol


def lift(reduced_pi, p_vec):
    """Joint distribution ``(p_l * pi_l, ..., (1 - p_l) * pi_l, ...)`` in joint order."""
    p = np.asarray(p_vec, dtype=float)
    reduced_pi = np.asarray(reduced_pi, dtype=float)
    return np.concatenate([p * reduced_pi, (1.0 - p) * reduced_pi])


def verify_lift(policy, p_vec, tol=1e-10):
    """Solve both chains independently and compare the joint solution with the lifted cell solution."""
    reduced_pi = stationary(build_reduced(policy, p_vec))
    joint_pi = stationary(build_joint(policy, p_vec))
    predicted = lift(reduced_pi, p_vec)
    deviation = float(np.max(np.abs(joint_pi - predicted)))
    return LiftReport(reduced_pi, joint_pi, predicted, deviation, tol)


class StayingPolicy(NamedTuple):
    a: float
    b: float
    valid: bool


def retrieve_staying_policy(p):
    """Self-transition probabilities after observing 1 (``a``) and 0 (``b``) at the absorbing cell.

    They satisfy ``p * a + (1 - p) * b = 1`` but only form probabilities when
    both are at most 1, which holds only at ``p = 0.5``.
    """
    p = check_open_unit(p, "p")
    norm = p * p + (1.0 - p) * (1.0 - p)
    a, b = p / norm, (1.0 - p) / norm
    return StayingPolicy(a, b, a <= 1.0 and b <= 1.0)


@dataclass(frozen=True)
class TransitionCounts:
    """``counts[k, u, l, v]``: number of observed moves from ``(k, u)`` to ``(l, v)``."""

    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    def __getitem__(self, key):
        return self.counts[key]

    def as_joint_matrix(self):
        m = self.counts.shape[0]
        out = np.zeros((2 * m, 2 * m), dtype=np.int64)
        for u in (0, 1):
            for v in (0, 1):
                rows = slice(0, m) if u == 1 else slice(m, 2 * m)
                cols = slice(0, m) if v == 1 else slice(m, 2 * m)
                out[rows, cols] = self.counts[:, u, :, v]
        return out


def count_transitions(trajectory, m=None):
    """Count adjacent ``(cell, observation)`` pairs of a trajectory."""
    traj = np.asarray(trajectory, dtype=np.int64)
    if traj.ndim != 2 or traj.shape[1] != 2:
        raise ValueError("trajectory must be a sequence of (cell, observation) pairs")
    if len(traj) < 2:
        raise ValueError("trajectory must contain at least 2 states")
    if m is None:
        m = int(traj[:, 0].max()) + 1
    counts = np.zeros((m, 2, m, 2), dtype=np.int64)
    np.add.at(counts, (traj[:-1, 0], traj[:-1, 1], traj[1:, 0], traj[1:, 1]), 1)
    return TransitionCounts(counts)


def _initial_cells(m, n_paths, rng, initial):
    if initial is None:
        return rng.integers(m, size=n_paths)
    initial = np.asarray(initial, dtype=float)
    return rng.choice(m, size=n_paths, p=initial)


def simulate_trajectory(policy, p_vec, n_steps, rng, initial=None):
    """Sample one path of the joint chain; returns an ``(n_steps, 2)`` array of (cell, observation)."""
    policy = check_policy(policy)
    p = check_probabilities(p_vec, "p_vec")
    m = policy.shape[0]
    cum = np.cumsum(policy, axis=2)
    cum[:, :, -1] = 1.0
    move_u = rng.random(n_steps)
    obs_u = rng.random(n_steps)
    out = np.empty((n_steps, 2), dtype=np.int64)
    cell = int(_initial_cells(m, 1, rng, initial)[0])
    cum_rows = [[row.tolist() for row in cum[k]] for k in range(m)]
    p_list = p.tolist()
    for i in range(n_steps):
        if i:
            cell = bisect_right(cum_rows[cell][y], move_u[i])
        y = 1 if obs_u[i] < p_list[cell] else 0
        out[i, 0] = cell
        out[i, 1] = y
    return out


def simulate_observation_sums(policy, p_vec, n_steps, n_paths, rng, initial=None):
    """Number of 1-observations in each of ``n_paths`` independent paths of length ``n_steps``."""
    policy = check_policy(policy)
    p = check_probabilities(p_vec, "p_vec")
    m = policy.shape[0]
    cum = np.cumsum(policy, axis=2)
    cum[:, :, -1] = 1.0
    cells = _initial_cells(m, n_paths, rng, initial)
    obs = (rng.random(n_paths) < p[cells]).astype(np.int64)
    sums = obs.copy()
    for _ in range(n_steps - 1):
        rows = cum[cells, obs]
        cells = np.minimum((rows < rng.random(n_paths)[:, None]).sum(axis=1), m - 1)
        obs = (rng.random(n_paths) < p[cells]).astype(np.int64)
        sums += obs
    return sums


def occupation_frequencies(matrices, n_steps, rng, start=0):
    """Empirical state frequencies of one long path per matrix, simulated side by side.

    All chains share one sorted lookup table: row ``r`` of the stacked
    cumulative matrices is shifted by ``r`` so a single ``searchsorted`` call
    samples the next state of every chain.
    """
    sizes = [np.asarray(M).shape[0] for M in matrices]
    width = max(sizes)
    n_chains = len(matrices)
    cum = np.ones((n_chains, width, width))
    for i, M in enumerate(matrices):
        M = check_stochastic(M)
        c = np.cumsum(M, axis=1)
        c[:, -1] = 1.0
        cum[i, :sizes[i], :sizes[i]] = c
    rows = np.arange(n_chains * width)
    table = (cum.reshape(-1, width) + rows[:, None]).ravel()
    base = np.arange(n_chains) * width
    row = base + start
    counts = np.zeros(n_chains * width, dtype=np.int64)
    block = 20_000
    done = 0
    while done < n_steps:
        size = min(block, n_steps - done)
        u = rng.random((size, n_chains))
        visited = np.empty((size, n_chains), dtype=np.int64)
        for t in range(size):
            visited[t] = row
            # entries of earlier rows are <= row, those of later rows >= row + 1
            row = np.searchsorted(table, u[t] + row, side="right") - (row * width - base)
        counts += np.bincount(visited.ravel(), minlength=n_chains * width)
        done += size
    counts = counts.reshape(n_chains, width)
    return [counts[i, :sizes[i]] / n_steps for i in range(n_chains)]
