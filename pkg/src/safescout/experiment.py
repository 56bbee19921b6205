"""Single runs and Monte Carlo batches of learner + classifier."""
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional

import numpy as np
import yaml

from . import environment as envmod
from .classifier import SAFE, classify, true_safe_set
from .environment import EnvironmentSpec
from .learner import ACTIVE_SET_EMPTY, LearnerConfig, run
from .oracle import LEARNER_STREAM, ORACLE_STREAM, TrustOracle, derive_seed
from .serialization import (environment_from_data, learner_config_from_dict,
                            learner_config_to_dict, load_environment, rounded)

DEFAULT_SEED = 42
SEED_ENV_VAR = "SAFESCOUT_SEED"
PRESET_DIR = Path(__file__).parent / "presets"
ERROR_QUANTILES = (0.5, 0.9, 0.99, 1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    environment: EnvironmentSpec
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    replications: int = 1
    output: str = "results"
    seed: Optional[int] = None
    environment_file: Optional[str] = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")

    def to_dict(self):
        env = ({"file": self.environment_file} if self.environment_file
               else rounded(self.environment.to_dict()))
        learner = learner_config_to_dict(self.learner)
        learner.pop("seed")
        return {"environment": env, "learner": learner, "replications": self.replications,
                "output": self.output, "seed": self.seed}


def resolve_config_path(path):
    """Return ``path`` if it exists, else the bundled preset of that name."""
    path = Path(path)
    if path.exists():
        return path
    bundled = PRESET_DIR / path.name
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"config file not found: {path}")


def parse_config(data, base_dir="."):
    if not isinstance(data, dict):
        raise ValueError("config must be a mapping")
    env_data = data.get("environment")
    env_file = None
    if isinstance(env_data, dict) and "file" in env_data:
        env_file = env_data["file"]
        env_path = Path(base_dir) / env_file
        if not env_path.exists():
            raise FileNotFoundError(f"environment file not found: {env_path}")
        env = load_environment(env_path)
    elif env_data is not None:
        env = environment_from_data(env_data)
    else:
        raise ValueError("config has no environment")
    problems = envmod.validate(env)
    if problems:
        raise ValueError("invalid environment: " + "; ".join(problems))
    seed = data.get("seed")
    return ExperimentConfig(environment=env,
                            learner=learner_config_from_dict(data.get("learner")),
                            replications=int(data.get("replications", 1)),
                            output=str(data.get("output", "results")),
                            seed=None if seed is None else int(seed),
                            environment_file=env_file)


def load_config(path):
    path = resolve_config_path(path)
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return parse_config(data, base_dir=path.parent)


def dump_config(config):
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


def resolve_seed(cli_seed=None, config_seed=None, environ=None):
    """CLI flag, then ``SAFESCOUT_SEED``, then the config file, then 42."""
    environ = os.environ if environ is None else environ
    if cli_seed is not None:
        return int(cli_seed)
    if environ.get(SEED_ENV_VAR):
        return int(environ[SEED_ENV_VAR])
    if config_seed is not None:
        return int(config_seed)
    return DEFAULT_SEED


@dataclass(frozen=True)
class ReplicationSummary:
    replication: int
    oracle_seed: int
    learner_seed: int
    terminated: str
    iterations: int
    n_k: list
    visits: list
    estimates: list
    c_values: list
    c_threshold: float
    route: str
    labels: list
    safe_set: list
    unsafe_visits: int

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class ExperimentReport:
    master_seed: int
    replications: List[ReplicationSummary]
    true_p: list
    true_safe_set: list
    aggregate: dict

    def to_dict(self):
        return rounded({"master_seed": self.master_seed, "true_p": self.true_p,
                        "true_safe_set": self.true_safe_set, "aggregate": self.aggregate,
                        "replications": [r.to_dict() for r in self.replications]})

    @classmethod
    def from_dict(cls, data):
        reps = [ReplicationSummary(**r) for r in data["replications"]]
        return cls(data["master_seed"], reps, data["true_p"], data["true_safe_set"],
                   data["aggregate"])


def run_replication(env, learner_config, master_seed, index):
    """Run replication ``index``; the oracle and learner get their own substreams."""
    oracle_seed = derive_seed(master_seed, index, ORACLE_STREAM)
    learner_seed = derive_seed(master_seed, index, LEARNER_STREAM)
    oracle = TrustOracle(env.true_p, oracle_seed)
    return run(env, oracle, replace(learner_config, seed=learner_seed))


def summarize(index, log, env):
    result = classify(log.c_values, log.final_estimates)
    truth = true_safe_set(env.true_p)
    unsafe = sum(1 for s in log.steps if s.cell not in truth)
    return ReplicationSummary(
        replication=index, oracle_seed=log.oracle_seed, learner_seed=log.config.seed,
        terminated=log.terminated, iterations=log.n_iterations,
        n_k=[f.eliminated_at for f in log.final], visits=[f.visits for f in log.final],
        estimates=[f.estimate for f in log.final], c_values=[f.c for f in log.final],
        c_threshold=result.c_threshold, route=result.route, labels=list(result.labels),
        safe_set=sorted(k + 1 for k in result.safe_set), unsafe_visits=unsafe)


def aggregate(summaries, env):
    truth = true_safe_set(env.true_p)
    true_labels = [SAFE if k in truth else "unsafe" for k in range(env.n_cells)]
    labels = np.array([s.labels for s in summaries])
    errors = np.abs(np.array([s.estimates for s in summaries]) - env.true_p)
    truth_1 = sorted(k + 1 for k in truth)
    return {
        "replications": len(summaries),
        "terminated_active_set_empty": sum(s.terminated == ACTIVE_SET_EMPTY for s in summaries),
        "label_agreement": [float(np.mean(labels[:, k] == true_labels[k]))
                            for k in range(env.n_cells)],
        "exact_safe_set_rate": float(np.mean([s.safe_set == truth_1 for s in summaries])),
        "abs_error_quantiles": {str(q): float(np.quantile(errors, q)) for q in ERROR_QUANTILES},
        "mean_iterations": float(np.mean([s.iterations for s in summaries])),
    }


def _replication_job(args):
    env, learner_config, master_seed, index = args
    log = run_replication(env, learner_config, master_seed, index)
    return log, summarize(index, log, env)


def run_experiment(config, master_seed, jobs=1):
    """Run every replication; results are ordered by replication index whatever ``jobs`` is."""
    tasks = [(config.environment, config.learner, master_seed, r)
             for r in range(config.replications)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_replication_job, tasks))
    else:
        results = [_replication_job(t) for t in tasks]
    logs = [log for log, _ in results]
    summaries = [s for _, s in results]
    report = ExperimentReport(master_seed, summaries, config.environment.true_p.tolist(),
                              sorted(k + 1 for k in true_safe_set(config.environment.true_p)),
                              aggregate(summaries, config.environment))
    return logs, report
