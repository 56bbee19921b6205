"""Active parameter learning loop: observe, update, maybe eliminate, move."""
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .environment import EnvironmentSpec
from .estimation import UNVISITED_PRIOR, CellStatistics, EstimateSnapshot, c_measure
from .exceptions import MalformedLogError
from .oracle import LEARNER_STREAM, ORACLE_STREAM, TrustOracle, derive_seed, make_rng
from .policy import (NO_ELIMINATION, EliminationDecision, PolicyConfig, check_elimination,
                     distribution_form, select_next)

ACTIVE_SET_EMPTY = "active_set_empty"
ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class LearnerConfig:
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    seed: int = 0
    max_iterations: Optional[int] = None
    initial_cell: Optional[int] = None

    def resolved_max_iterations(self, m):
        pc = self.policy
        if self.max_iterations is None:
            return m * (pc.n_max + pc.n_delta + 2) * 10
        if self.max_iterations < m * (pc.n_delta + 1):
            raise ValueError(
                f"max_iterations must be at least m * (n_delta + 1) = {m * (pc.n_delta + 1)}")
        return int(self.max_iterations)

    def to_dict(self):
        return {**asdict(self.policy), "seed": self.seed,
                "max_iterations": self.max_iterations, "initial_cell": self.initial_cell}

    @classmethod
    def from_dict(cls, data):
        policy_keys = ("delta", "n_delta", "n_max", "tie_tolerance")
        policy = PolicyConfig(**{k: data[k] for k in policy_keys if k in data})
        return cls(policy=policy, seed=int(data.get("seed", 0)),
                   max_iterations=data.get("max_iterations"),
                   initial_cell=data.get("initial_cell"))


@dataclass(frozen=True)
class Step:
    iteration: int
    cell: int
    y: int
    successes: int
    visits: int
    elimination: Optional[str] = None

    @property
    def estimate(self):
        return self.successes / self.visits


@dataclass(frozen=True)
class FinalCell:
    cell: int
    eliminated_at: Optional[int]
    successes: int
    visits: int

    @property
    def estimate(self):
        return self.successes / self.visits if self.visits else UNVISITED_PRIOR

    @property
    def c(self):
        return c_measure(self.estimate)


@dataclass
class RunLog:
    n_cells: int
    config: LearnerConfig
    initial_cell: int
    steps: List[Step]
    final: List[FinalCell]
    terminated: str
    oracle_seed: Optional[int] = None
    prior: float = UNVISITED_PRIOR

    @property
    def n_iterations(self):
        return len(self.steps)

    @property
    def final_estimates(self):
        return np.array([f.estimate for f in self.final])

    @property
    def c_values(self):
        return np.array([f.c for f in self.final])

    @property
    def visits(self):
        return np.array([f.visits for f in self.final])

    def elimination_order(self):
        return [s.cell for s in self.steps if s.elimination is not None]

    def snapshot_at(self, iteration):
        """Estimates of every cell right after ``iteration`` (prior for unvisited cells)."""
        values = np.full(self.n_cells, self.prior)
        for step in self.steps:
            if step.iteration > iteration:
                break
            values[step.cell] = step.estimate
        return EstimateSnapshot(iteration, tuple(values))


def run(env, oracle, config=LearnerConfig()):
    """Run the learner until every cell is eliminated or the iteration cap is hit."""
    m = env.n_cells if isinstance(env, EnvironmentSpec) else int(env)
    if oracle.n_cells != m:
        raise ValueError("oracle and environment disagree on the number of cells")
    if m < 1:
        raise ValueError("environment has no cells")
    pc = config.policy
    cap = config.resolved_max_iterations(m)
    rng = make_rng(config.seed)
    current = int(rng.integers(m)) if config.initial_cell is None else int(config.initial_cell)
    if not 0 <= current < m:
        raise IndexError("initial_cell out of range")

    stats = [CellStatistics(n_delta=pc.n_delta) for _ in range(m)]
    estimates = np.full(m, UNVISITED_PRIOR)
    active = set(range(m))
    steps = []
    n = 1
    terminated = ITERATION_CAP
    while active:
        if n > cap:
            break
        cell_stats = stats[current]
        y = oracle.observe(current)
        cell_stats.consecutive_stay += 1
        cell_stats.record(y)
        estimates[current] = cell_stats.estimate()
        decision = check_elimination(cell_stats, pc)
        if decision.eliminate:
            active.discard(current)
            cell_stats.freeze(n)
        steps.append(Step(n, current, y, cell_stats.successes, cell_stats.visits,
                          decision.reason if decision.eliminate else None))
        if not active:
            terminated = ACTIVE_SET_EMPTY
            break
        nxt = select_next(active, estimates, pc, rng)
        if nxt != current:
            stats[nxt].consecutive_stay = 0
        current = nxt
        n += 1

    final = [FinalCell(k, s.eliminated_at, s.successes, s.visits) for k, s in enumerate(stats)]
    return RunLog(m, config, steps[0].cell if steps else current, steps, final, terminated,
                  oracle_seed=getattr(oracle, "seed", None))


@dataclass(frozen=True)
class ReplayReport:
    verified: bool
    first_divergence: Optional[int] = None
    message: str = ""


def _check_well_formed(log):
    if not log.steps:
        raise MalformedLogError("log has no steps")
    if [s.iteration for s in log.steps] != list(range(1, len(log.steps) + 1)):
        raise MalformedLogError("iterations are not 1, 2, 3, ...")
    if len(log.final) != log.n_cells:
        raise MalformedLogError("final section does not cover every cell")
    if log.terminated not in (ACTIVE_SET_EMPTY, ITERATION_CAP):
        raise MalformedLogError(f"unknown termination status {log.terminated!r}")
    eliminated = [s.cell for s in log.steps if s.elimination is not None]
    if len(set(eliminated)) != len(eliminated):
        raise MalformedLogError("a cell is eliminated twice")
    if log.terminated == ACTIVE_SET_EMPTY and len(eliminated) != log.n_cells:
        raise MalformedLogError("log ends before every cell was eliminated")
    final_elim = {f.cell: f.eliminated_at for f in log.final if f.eliminated_at is not None}
    logged_elim = {s.cell: s.iteration for s in log.steps if s.elimination is not None}
    if final_elim != logged_elim:
        raise MalformedLogError("final elimination record disagrees with the steps")


def replay(log, env=None, config=None):
    """Recompute every estimate and decision from the logged observations.

    Returns a report with the first iteration whose logged values cannot be
    reproduced. Raises :class:`MalformedLogError` for truncated or
    inconsistent logs.
    """
    _check_well_formed(log)
    m = log.n_cells
    if env is not None and env.n_cells != m:
        raise MalformedLogError("log and environment disagree on the number of cells")
    config = config or log.config
    pc = config.policy
    stats = [CellStatistics(n_delta=pc.n_delta) for _ in range(m)]
    estimates = np.full(m, log.prior)
    active = set(range(m))
    previous = None
    for i, step in enumerate(log.steps):
        n = step.iteration
        if step.cell not in active:
            return ReplayReport(False, n, f"cell {step.cell} visited after elimination")
        if previous is not None:
            allowed = distribution_form(active, estimates, pc)
            if allowed[step.cell] == 0.0:
                return ReplayReport(False, n, f"move to cell {step.cell} is not a greedy choice")
            if step.cell != previous:
                stats[step.cell].consecutive_stay = 0
        cell_stats = stats[step.cell]
        cell_stats.consecutive_stay += 1
        cell_stats.record(step.y)
        estimates[step.cell] = cell_stats.estimate()
        if (cell_stats.successes, cell_stats.visits) != (step.successes, step.visits):
            return ReplayReport(False, n, "estimate does not match the logged observations")
        decision = check_elimination(cell_stats, pc)
        logged = EliminationDecision(step.elimination is not None,
                                     step.elimination or NO_ELIMINATION)
        if decision != logged:
            return ReplayReport(False, n, f"elimination decision {decision.reason!r} "
                                          f"differs from logged {logged.reason!r}")
        if decision.eliminate:
            active.discard(step.cell)
            cell_stats.freeze(n)
        if not active and i != len(log.steps) - 1:
            return ReplayReport(False, n + 1, "steps continue after the active set emptied")
        previous = step.cell
    for f, s in zip(log.final, stats):
        if (f.successes, f.visits, f.eliminated_at) != (s.successes, s.visits, s.eliminated_at):
            return ReplayReport(False, len(log.steps), f"final record of cell {f.cell} differs")
    return ReplayReport(True)


class ActiveParameterLearner(BaseEstimator):
    """Estimator wrapper around :func:`run`.

    ``fit(env)`` queries a simulated oracle for ``env`` (or the ``oracle``
    passed in) and exposes the per-cell results as fitted attributes.

    Parameters
    ----------
    delta, n_delta, n_max, tie_tolerance : see :class:`PolicyConfig`.
    max_iterations : int or None
        Safety cap; ``None`` picks ``m * (n_max + n_delta + 2) * 10``.
    initial_cell : int or None
        Starting cell; ``None`` draws it uniformly.
    random_state : int
        Master seed. The oracle and the tie-breaking stream use separate substreams.
    """

    def __init__(self, delta=0.02, n_delta=250, n_max=50, tie_tolerance=1e-9,
                 max_iterations=None, initial_cell=None, random_state=0):
        self.delta = delta
        self.n_delta = n_delta
        self.n_max = n_max
        self.tie_tolerance = tie_tolerance
        self.max_iterations = max_iterations
        self.initial_cell = initial_cell
        self.random_state = random_state

    def _learner_config(self):
        policy = PolicyConfig(self.delta, self.n_delta, self.n_max, self.tie_tolerance)
        return LearnerConfig(policy, derive_seed(self.random_state, 0, LEARNER_STREAM),
                             self.max_iterations, self.initial_cell)

    def fit(self, env, oracle=None):
        if oracle is None:
            oracle = TrustOracle(env.true_p, derive_seed(self.random_state, 0, ORACLE_STREAM))
        self.log_ = run(env, oracle, self._learner_config())
        self.estimates_ = self.log_.final_estimates
        self.c_ = self.log_.c_values
        self.visits_ = self.log_.visits
        self.eliminated_at_ = np.array([f.eliminated_at if f.eliminated_at is not None else -1
                                        for f in self.log_.final])
        self.n_iter_ = self.log_.n_iterations
        self.terminated_ = self.log_.terminated
        return self

    def transform(self, env=None):
        """Per-cell ``[c_k, p_k]`` rows, the input expected by :class:`SafeRegionClassifier`."""
        check_is_fitted(self, "log_")
        return np.column_stack([self.c_, self.estimates_])

    def fit_transform(self, env, oracle=None):
        return self.fit(env, oracle).transform()
