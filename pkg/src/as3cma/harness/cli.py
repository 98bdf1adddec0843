"""Command line entry point: ``as3cma {run,sweep,oracle,gridgen,stats}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from ..as3 import chi2_quantile
from ..problems import distinct_worst_scenarios, generate_synthetic_grids, save_grids
from ..worstcase import FCallCounter, ball_sampler, ellipsoid_sampler, subset_support_ratios, support_oracle
from .config import ConfigError, ExperimentConfig, apply_overrides, dump_config, load_config
from .export import ExportError, export, load_rows, read_header
from .runner import run_experiment
from .stats import mann_whitney_u, median_iqr

log = logging.getLogger("as3cma")

SUMMARY_FIELDS = (
    "trial", "seed", "algorithm", "problem", "success", "outcome", "fcalls", "fcalls_used",
    "iterations", "restarts", "best", "final_sum_p", "final_subset_size", "hit_ratio", "excess_ratio",
)


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--algo", help="Baseline | As3Adaptive | As3Fixed")
    p.add_argument("--problem", help="P1..P5 | WellPlacement")
    p.add_argument("--seed", help="seed_base; trial i uses seed + i")
    p.add_argument("--trials")
    p.add_argument("--budget", help="f-call budget per run")
    p.add_argument("--n")
    p.add_argument("--m")
    p.add_argument("--K")
    p.add_argument("--L")
    p.add_argument("--grid", help="grid file (WellPlacement)")
    p.add_argument("--restart", help="None | Simple | DoubleLambda")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="any config key, repeatable")
    p.add_argument("--jobs", type=int, default=1, help="concurrent trials")


def _config_from_args(args) -> ExperimentConfig:
    pairs = {}
    if args.problem:
        pairs["problem"] = args.problem
    if args.config:
        cfg = load_config(args.config)
    else:
        wp = (args.problem or "").lower() == "wellplacement"
        cfg = ExperimentConfig.well_placement() if wp else ExperimentConfig()
    flags = {
        "algorithm": args.algo, "seed": args.seed, "trials": args.trials, "budget": args.budget,
        "n": args.n, "m": args.m, "K": args.K, "L": args.L, "grid": args.grid, "restart": args.restart,
    }
    pairs.update({k: v for k, v in flags.items() if v is not None})
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        pairs[k] = v
    return apply_overrides(cfg, pairs)


def _write_summary(rows, path: Path) -> None:
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()) if rows else SUMMARY_FIELDS)
        w.writeheader()
        w.writerows(rows)


def _aggregate(rows) -> dict:
    fc = [r["fcalls"] for r in rows]
    best = [r["best"] for r in rows]
    med, q25, q75 = median_iqr(fc)
    bmed, b25, b75 = median_iqr(best)
    return {
        "trials": len(rows),
        "successes": sum(bool(r["success"]) for r in rows),
        "fcalls_mean": float(np.mean(fc)),
        "fcalls_median": med,
        "fcalls_q25": q25,
        "fcalls_q75": q75,
        "best_median": bmed,
        "best_q25": b25,
        "best_q75": b75,
        "restarts_median": float(np.median([r["restarts"] for r in rows])),
    }


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s on %s, %d trials", cfg.algorithm.value, cfg.problem, cfg.trials)
    result = run_experiment(cfg, jobs=args.jobs)
    (out / "config.txt").write_text(dump_config(cfg))
    export(result.traces, args.format, out / f"traces.{args.format}")
    rows = result.table
    _write_summary(rows, out / "summary.csv")
    agg = _aggregate(rows)
    (out / "aggregate.json").write_text(json.dumps(agg, indent=2) + "\n")
    print(json.dumps(agg))
    return 0


def cmd_sweep(args) -> int:
    base = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for value in args.values.split(","):
        cfg = apply_overrides(base, {args.param: value})
        log.info("sweep %s = %s", args.param, value)
        result = run_experiment(cfg, jobs=args.jobs)
        tag = f"{args.param}={value}".replace("/", "_")
        export(result.traces, "csv", out / f"traces_{tag}.csv")
        rows.append({"param": args.param, "value": value, **_aggregate(result.table)})
    _write_summary(rows, out / "sweep.csv")
    for r in rows:
        print(json.dumps(r))
    return 0


def cmd_oracle(args) -> int:
    cfg = _config_from_args(args)
    problem = cfg.build_problem()
    rng = np.random.default_rng(cfg.seed_base)
    center = np.zeros(problem.n) if args.center is None else np.array([float(c) for c in args.center.split(",")])
    if center.size != problem.n:
        raise ConfigError(f"--center needs {problem.n} coordinates")
    counter = FCallCounter()
    report = {"problem": problem.name, "n": problem.n, "m": problem.m, "center": center.tolist(), "balls": []}
    for radius in (float(r) for r in args.radii.split(",")):
        if args.sigma is not None:
            q = chi2_quantile(problem.n, args.gamma)
            sampler = ellipsoid_sampler(center, (args.sigma * radius) ** 2 * np.eye(problem.n), q, rng)
        else:
            sampler = ball_sampler(center, radius, rng)
        found = sorted(support_oracle(problem, sampler, args.samples, counter))
        entry = {"radius": radius, "support": found}
        if problem.claimed_support:
            entry["matches_claim"] = set(found) == set(problem.claimed_support)
            entry["hit_ratio"], entry["excess_ratio"] = subset_support_ratios(found, problem.claimed_support)
        report["balls"].append(entry)
    report["oracle_fcalls"] = counter.total
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_gridgen(args) -> int:
    stack = generate_synthetic_grids(args.seed, args.m, args.rows, args.cols, args.bumps, args.smoothness)
    save_grids(stack, args.out)
    print(json.dumps({"path": args.out, "m": stack.m, "rows": stack.rows, "cols": stack.cols,
                      "distinct_worst_scenarios": distinct_worst_scenarios(stack)}))
    return 0


def _trials_from_traces(path) -> tuple[dict, list]:
    meta = read_header(path)
    budget = int(meta.get("budget", 0)) or None
    by_trial = defaultdict(list)
    for row in load_rows(path):
        by_trial[row["trial"]].append(row)
    trials = []
    for trial, rows in sorted(by_trial.items()):
        last = rows[-1]
        success = last["outcome"] == "Success"
        fcalls = last["fcalls"] if success or budget is None else budget
        trials.append({
            "trial": trial,
            "success": success,
            "fcalls": fcalls,
            "best": float(np.nanmin([r["F_mt"] for r in rows])),
            "restarts": last["restarts"],
            "final_sum_p": last["sum_p"],
        })
    return meta, trials


def cmd_stats(args) -> int:
    groups = []
    for path in args.traces:
        meta, trials = _trials_from_traces(path)
        if not trials:
            raise ConfigError(f"{path}: no trace rows")
        groups.append((path, meta, trials))
    out_rows = []
    ref_path, _, ref = groups[0]
    for path, meta, trials in groups:
        row = {"file": path, "algorithm": meta.get("algorithm", ""), "problem": meta.get("problem", "")}
        row.update(_aggregate(trials))
        if path != ref_path:
            for metric in ("fcalls", "best"):
                u, p = mann_whitney_u([t[metric] for t in trials], [t[metric] for t in ref])
                row[f"U_{metric}_vs_first"] = u
                row[f"p_{metric}_vs_first"] = p
        out_rows.append(row)
    keys = []
    for r in out_rows:
        keys += [k for k in r if k not in keys]
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(out_rows)
    for r in out_rows:
        print(json.dumps(r))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="as3cma", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a multi-trial experiment and export traces")
    _add_run_options(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="repeat an experiment over values of one config key")
    _add_run_options(p)
    p.add_argument("--param", required=True, help="config key, e.g. K, m, as3.eta, as3.lambda_s")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="brute-force support scenarios around a point")
    _add_run_options(p)
    p.add_argument("--center", help="comma-separated point (default: origin)")
    p.add_argument("--radii", default="1e-1,1e-2,1e-3")
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--sigma", type=float, help="use gamma-ellipsoids of N(center, (sigma*r)^2 I) instead of balls")
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--out", help="JSON report path")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gridgen", help="write a synthetic grid stack")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=50)
    p.add_argument("--rows", type=int, default=50)
    p.add_argument("--cols", type=int, default=50)
    p.add_argument("--bumps", type=int, default=12)
    p.add_argument("--smoothness", type=float, default=6.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gridgen)

    p = sub.add_parser("stats", help="median/IQR and U-tests over exported traces")
    p.add_argument("traces", nargs="+", help="trace files; later files are tested against the first")
    p.add_argument("--out", required=True, help="CSV table path")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ExportError, OSError, ValueError) as exc:
        print(f"as3cma: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
