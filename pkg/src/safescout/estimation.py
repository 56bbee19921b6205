"""Per-cell sufficient statistics and the robust c = p(1 - p) measure."""
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_unit

#: Estimate reported for a cell that has not been visited yet.
UNVISITED_PRIOR = 0.5


@dataclass
class CellStatistics:
    """Counts for one cell plus the window of its most recent estimates.

    The window is indexed by the cell's own visits and holds at most
    ``n_delta + 1`` values.
    """

    n_delta: int = 250
    visits: int = 0
    successes: int = 0
    consecutive_stay: int = 0
    eliminated_at: Optional[int] = None
    frozen_c: Optional[float] = None
    history: deque = field(default=None, repr=False)

    def __post_init__(self):
        if self.history is None:
            self.history = deque(maxlen=self.n_delta + 1)
        elif self.history.maxlen != self.n_delta + 1:
            self.history = deque(self.history, maxlen=self.n_delta + 1)

    @property
    def eliminated(self):
        return self.eliminated_at is not None

    def estimate(self):
        if self.visits == 0:
            return UNVISITED_PRIOR
        return self.successes / self.visits

    def record(self, y):
        if y not in (0, 1):
            raise ValueError(f"observation must be 0 or 1, got {y!r}")
        self.visits += 1
        self.successes += int(y)
        self.history.append(self.successes / self.visits)
        return self

    def freeze(self, iteration):
        self.eliminated_at = int(iteration)
        self.frozen_c = c_measure(self.estimate())
        return self


def record_observation(stats, y):
    """Add one observation to ``stats`` in place and return it."""
    return stats.record(y)


def estimate(stats):
    """successes / visits, or 0.5 for an unvisited cell."""
    return stats.estimate()


def c_measure(p):
    p = check_unit(p, "p")
    return p * (1.0 - p)


def estimation_error(estimate, truth):
    return float(estimate) - float(truth)


@dataclass(frozen=True)
class EstimateSnapshot:
    iteration: int
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("snapshot values must lie in [0, 1]")
        object.__setattr__(self, "values", values)

    def as_array(self):
        return np.array(self.values)
