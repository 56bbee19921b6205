"""File formats: YAML configs, JSON-lines run logs, JSON reports, CSV tables.

Cells are numbered from 1 in every file and from 0 in the Python API. Real
numbers are written with 12 significant digits (matrices with 15).
"""
import csv
import io
import json
from pathlib import Path

import numpy as np
import yaml

from .environment import EnvironmentSpec
from .exceptions import MalformedLogError
from .learner import FinalCell, LearnerConfig, RunLog, Step

LOG_FORMAT = "safescout-runlog/1"


def round12(x):
    return float(f"{float(x):.12g}")


def rounded(obj):
    """Recursively round floats to 12 significant digits."""
    if isinstance(obj, (float, np.floating)):
        return round12(obj)
    if isinstance(obj, dict):
        return {k: rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps_json(obj):
    return json.dumps(rounded(obj), indent=2) + "\n"


# -- environment and configs ------------------------------------------------

def environment_to_dict(env):
    return rounded(env.to_dict())


def load_environment(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if isinstance(data, dict) and "environment" in data:
        data = data["environment"]
    return environment_from_data(data)


def environment_from_data(data):
    if not isinstance(data, dict):
        raise ValueError("environment must be a mapping")
    missing = {"dimension", "centers", "true_p"} - set(data)
    if missing:
        raise ValueError(f"environment is missing {sorted(missing)}")
    return EnvironmentSpec.from_dict(data)


def learner_config_to_dict(config):
    data = config.to_dict()
    if data["initial_cell"] is not None:
        data["initial_cell"] += 1
    return data


def learner_config_from_dict(data):
    data = dict(data or {})
    if data.get("initial_cell") is not None:
        data["initial_cell"] = int(data["initial_cell"]) - 1
    return LearnerConfig.from_dict(data)


# -- run logs ---------------------------------------------------------------

def run_log_records(log):
    yield {"type": "header", "format": LOG_FORMAT, "n_cells": log.n_cells,
           "initial_cell": log.initial_cell + 1, "prior": log.prior,
           "oracle_seed": log.oracle_seed, "config": learner_config_to_dict(log.config)}
    for s in log.steps:
        yield {"type": "step", "n": s.iteration, "cell": s.cell + 1, "y": s.y,
               "estimate": s.estimate, "successes": s.successes, "visits": s.visits,
               "elimination": s.elimination}
    yield {"type": "final", "terminated": log.terminated,
           "cells": [{"cell": f.cell + 1, "n_k": f.eliminated_at, "estimate": f.estimate,
                      "c": f.c, "successes": f.successes, "visits": f.visits}
                     for f in log.final]}


def dumps_run_log(log):
    return "".join(json.dumps(rounded(r)) + "\n" for r in run_log_records(log))


def loads_run_log(text):
    try:
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
    except json.JSONDecodeError as exc:
        raise MalformedLogError(f"unreadable run log: {exc}") from exc
    if not records or records[0].get("type") != "header":
        raise MalformedLogError("run log has no header")
    if records[-1].get("type") != "final":
        raise MalformedLogError("run log is truncated (no final record)")
    header, final = records[0], records[-1]
    try:
        steps = [Step(r["n"], r["cell"] - 1, r["y"], r["successes"], r["visits"],
                      r["elimination"]) for r in records[1:-1]]
        cells = [FinalCell(c["cell"] - 1, c["n_k"], c["successes"], c["visits"])
                 for c in final["cells"]]
        return RunLog(header["n_cells"], learner_config_from_dict(header["config"]),
                      header["initial_cell"] - 1, steps, cells, final["terminated"],
                      header.get("oracle_seed"), header.get("prior", 0.5))
    except (KeyError, TypeError) as exc:
        raise MalformedLogError(f"run log record is missing a field: {exc}") from exc


# -- tables -----------------------------------------------------------------

def matrix_to_csv(matrix):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(matrix, dtype=float):
        writer.writerow([f"{x:.15g}" for x in row])
    return buf.getvalue()


def matrix_from_csv(text):
    return np.array([[float(x) for x in row] for row in csv.reader(io.StringIO(text)) if row])


def read_cell_table(path, columns):
    """Read a CSV with a ``cell`` column plus ``columns``; rows are returned in cell order."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} has no data rows")
    missing = {"cell", *columns} - set(rows[0])
    if missing:
        raise ValueError(f"{path} is missing columns {sorted(missing)}")
    try:
        cells = [int(r["cell"]) for r in rows]
        values = np.array([[float(r[c]) for c in columns] for r in rows])
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{path}: {exc}") from exc
    if sorted(cells) != list(range(1, len(cells) + 1)):
        raise ValueError(f"{path}: cells must be numbered 1..m exactly once")
    return values[np.argsort(cells)]


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
