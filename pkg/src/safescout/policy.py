"""One-step greedy cell selection and the elimination rules."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PolicyConfig:
    """Elimination parameters.

    delta, n_delta: a cell is dropped once its last ``n_delta + 1`` estimates
        all lie within ``delta`` of the current one.
    n_max: a cell is dropped after ``n_max`` consecutive iterations spent there.
    tie_tolerance: c values within this distance of the minimum count as tied.
    """

    delta: float = 0.02
    n_delta: int = 250
    n_max: int = 50
    tie_tolerance: float = 1e-9

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.n_delta < 1 or self.n_max < 1:
            raise ValueError("n_delta and n_max must be positive")
        if not 0.0 <= self.tie_tolerance < self.delta:
            raise ValueError("tie_tolerance must be nonnegative and below delta")


CONSECUTIVE_STAY = "consecutive_stay"
ESTIMATE_STABLE = "estimate_stable"
NO_ELIMINATION = "none"


@dataclass(frozen=True)
class EliminationDecision:
    eliminate: bool
    reason: str = NO_ELIMINATION

    def __post_init__(self):
        if self.eliminate == (self.reason == NO_ELIMINATION):
            raise ValueError("reason must be 'none' exactly when nothing is eliminated")


def _active_array(active_cells):
    active = np.array(sorted(int(k) for k in active_cells), dtype=np.int64)
    if active.size == 0:
        raise ValueError("active set is empty")
    return active


def distribution_form(active_cells, estimates, config=PolicyConfig()):
    """Optimal one-step distribution over all cells.

    The objective ``q(1 - q)`` with ``q = sum_l p_l * pi_l`` is concave, so the
    minimum sits on a vertex: mass ``1/r`` on each of the ``r`` active cells
    whose ``p(1 - p)`` ties for the smallest value.
    """
    active = _active_array(active_cells)
    est = np.asarray(estimates, dtype=float)
    c = est[active] * (1.0 - est[active])
    winners = active[c - c.min() <= config.tie_tolerance]
    dist = np.zeros(len(est))
    dist[winners] = 1.0 / len(winners)
    return dist


def select_next(active_cells, estimates, config, rng):
    """Sample the next cell from :func:`distribution_form`."""
    dist = distribution_form(active_cells, estimates, config)
    support = np.flatnonzero(dist)
    if len(support) == 1:
        return int(support[0])
    return int(support[rng.integers(len(support))])


def check_elimination(stats, config):
    """Evaluate the consecutive-stay rule, then the estimate-stability rule, for the current cell."""
    if stats.consecutive_stay >= config.n_max:
        return EliminationDecision(True, CONSECUTIVE_STAY)
    history = stats.history
    if stats.visits >= config.n_delta + 1 and len(history) == config.n_delta + 1:
        current = history[-1]
        if max(history) - current < config.delta and current - min(history) < config.delta:
            return EliminationDecision(True, ESTIMATE_STABLE)
    return EliminationDecision(False)
