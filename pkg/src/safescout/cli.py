"""Command line entry point: ``safescout <subcommand>``.

Exit codes: 0 success, 1 a replication hit the iteration cap, 2 invalid
input, 3 I/O error.
"""
import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .classifier import classify
from .dp_oracle import HorizonSpec, greedy_gap
from .exceptions import BudgetExceededError, ReducibleChainError
from .experiment import dump_config, load_config, resolve_seed, run_experiment
from .ldp import rate_curve
from .learner import ITERATION_CAP
from .markov import build_joint, build_reduced, check_policy, verify_lift
from .serialization import (dumps_json, dumps_run_log, matrix_to_csv, read_cell_table,
                            write_text)

EXIT_OK, EXIT_CAP, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3
DEFAULT_PRESET = "table1.preset"

log = logging.getLogger("safescout")


class InvalidInput(Exception):
    pass


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        write_text(out, text)


def cmd_simulate(args):
    try:
        config = load_config(args.config or DEFAULT_PRESET)
    except FileNotFoundError as exc:
        raise InvalidInput(str(exc)) from exc
    except (ValueError, TypeError, KeyError, yaml.YAMLError) as exc:
        raise InvalidInput(f"invalid config: {exc}") from exc
    if args.replications is not None:
        if args.replications < 1:
            raise InvalidInput("--replications must be at least 1")
        config = type(config)(**{**config.__dict__, "replications": args.replications})
    seed = resolve_seed(args.seed, config.seed)
    out = Path(args.out or config.output)
    logs, report = run_experiment(config, seed, jobs=args.jobs)
    for i, run_log in enumerate(logs):
        write_text(out / "runs" / f"run_{i:04d}.jsonl", dumps_run_log(run_log))
    write_text(out / "report.json", dumps_json(report.to_dict()))
    write_text(out / "config.yaml", dump_config(config))
    write_text(out / "estimates.csv", _estimates_csv(report))
    agg = report.aggregate
    print(f"replications: {agg['replications']}  seed: {seed}")
    print(f"true safe set: {report.true_safe_set}")
    for rep in report.replications[:10]:
        print(f"  run {rep.replication}: {rep.terminated} after {rep.iterations} iterations, "
              f"c_T={rep.c_threshold:.6g} ({rep.route}), safe={rep.safe_set}")
    print(f"exact safe set rate: {agg['exact_safe_set_rate']:.3f}")
    if any(r.terminated == ITERATION_CAP for r in report.replications):
        return EXIT_CAP
    return EXIT_OK


def _estimates_csv(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["replication", "cell", "n_k", "visits", "estimate", "c", "label"])
    for rep in report.replications:
        for k in range(len(rep.estimates)):
            writer.writerow([rep.replication, k + 1, rep.n_k[k], rep.visits[k],
                             f"{rep.estimates[k]:.12g}", f"{rep.c_values[k]:.12g}",
                             rep.labels[k]])
    return buf.getvalue()


def cmd_classify(args):
    try:
        table = read_cell_table(args.input, ["c", "p"])
        result = classify(table[:, 0], table[:, 1])
    except (OSError, ValueError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise InvalidInput(f"input file not found: {args.input}") from exc
        raise InvalidInput(str(exc)) from exc
    print(f"c_T = {result.c_threshold:.6g}  route = {result.route}  k* = {result.k_star}")
    for k, label in enumerate(result.labels):
        print(f"  cell {k + 1}: c = {table[k, 0]:.6g}  p = {table[k, 1]:.6g}  {label}")
    print(f"safe set: {sorted(k + 1 for k in result.safe_set)}")
    if args.out:
        write_text(args.out, dumps_json(result.to_dict()))
    return EXIT_OK


def cmd_rate_curve(args):
    if not 0.0 < args.eps < 1.0:
        raise InvalidInput("--eps must lie strictly inside (0, 1)")
    if args.points < 2:
        raise InvalidInput("--points must be at least 2")
    _emit(rate_curve(args.eps, args.points).to_csv(), args.out)
    return EXIT_OK


def _read_policy(path, m):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    policy = np.full((m, 2, m), np.nan)
    try:
        for row in rows:
            k, u = int(row["cell"]) - 1, int(row["observation"])
            policy[k, u] = [float(row[f"to_{l + 1}"]) for l in range(m)]
    except (KeyError, ValueError, IndexError, TypeError) as exc:
        raise InvalidInput(f"malformed policy file: {exc}") from exc
    if np.isnan(policy).any():
        raise InvalidInput("policy file must define every (cell, observation) row")
    return policy


def cmd_stationary(args):
    try:
        p = read_cell_table(args.p, ["p"])[:, 0]
        policy = check_policy(_read_policy(args.policy, len(p)))
        joint, reduced = build_joint(policy, p), build_reduced(policy, p)
    except FileNotFoundError as exc:
        raise InvalidInput(str(exc)) from exc
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    out = Path(args.out or "stationary")
    write_text(out / "joint_matrix.csv", matrix_to_csv(joint))
    write_text(out / "reduced_matrix.csv", matrix_to_csv(reduced))
    try:
        report = verify_lift(policy, p)
    except ReducibleChainError as exc:
        print(f"reducible chain: {exc}", file=sys.stderr)
        return EXIT_INVALID
    m = len(p)
    joint_rows = ["cell,observation,pi"]
    for idx, value in enumerate(report.joint_stationary):
        cell, obs = (idx, 1) if idx < m else (idx - m, 0)
        joint_rows.append(f"{cell + 1},{obs},{value:.15g}")
    write_text(out / "joint_stationary.csv", "\n".join(joint_rows) + "\n")
    reduced_rows = ["cell,pi"] + [f"{k + 1},{v:.15g}"
                                  for k, v in enumerate(report.reduced_stationary)]
    write_text(out / "reduced_stationary.csv", "\n".join(reduced_rows) + "\n")
    write_text(out / "lift_report.json", dumps_json(
        {"max_deviation": report.max_deviation, "tol": report.tol, "ok": report.ok}))
    print(f"lift max deviation: {report.max_deviation:.3e} ({'ok' if report.ok else 'FAILED'})")
    return EXIT_OK


def cmd_dp_compare(args):
    data = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = yaml.safe_load(fh) or {}
        except FileNotFoundError as exc:
            raise InvalidInput(f"config file not found: {args.config}") from exc
        except yaml.YAMLError as exc:
            raise InvalidInput(f"invalid config: {exc}") from exc
    try:
        spec = HorizonSpec(int(data.get("horizon", 8)), data.get("p", [0.9, 0.6]),
                           data.get("initial"))
        runs = int(args.replications or data.get("runs", 10_000))
    except BudgetExceededError as exc:
        raise InvalidInput(f"budget exceeded: {exc}") from exc
    except (ValueError, TypeError) as exc:
        raise InvalidInput(f"invalid config: {exc}") from exc
    seed = resolve_seed(args.seed, data.get("seed"))
    report = greedy_gap(spec, runs, seed)
    _emit(dumps_json({"seed": seed, **report.to_dict()}), args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="safescout",
                                     description="Active safe-region learning simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the learner and classifier")
    p.add_argument("--config", help=f"YAML config (default: bundled {DEFAULT_PRESET})")
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="classify cells from a cell,c,p CSV")
    p.add_argument("input")
    p.add_argument("--out", help="write the classification result as JSON")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("rate-curve", help="emit -I(eps, p) as CSV")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--points", type=int, default=99)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_rate_curve)

    p = sub.add_parser("stationary", help="joint and reduced chains of a policy")
    p.add_argument("--policy", required=True, help="CSV: cell,observation,to_1..to_m")
    p.add_argument("--p", required=True, help="CSV: cell,p")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("dp-compare", help="greedy rule versus the best stationary policy")
    p.add_argument("--config", help="YAML with horizon, p, initial, runs, seed")
    p.add_argument("--seed", type=int)
    p.add_argument("--replications", type=int, help="Monte Carlo runs")
    p.add_argument("--out", help="output JSON (default: stdout)")
    p.set_defaults(func=cmd_dp_compare)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
