"""Sensitivity of the adaptive optimizer to one AS3 or problem parameter.

Each value gets its own multi-trial run; the table lists success count and
median / IQR of f-calls.

    python scripts/sensitivity_sweep.py --problem P2 --param as3.eta --values 0.1,0.3,0.5,0.9
    python scripts/sensitivity_sweep.py --problem P2 --param K --values 2,5,10,20 --m 100
"""
import argparse
import csv
import logging
from pathlib import Path

from as3cma.harness import ExperimentConfig, median_iqr, run_experiment
from as3cma.harness.config import apply_overrides

log = logging.getLogger("sweep")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problem", default="P2")
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--m", type=int, default=100)
    ap.add_argument("--K", type=int, default=5)
    ap.add_argument("--L", type=int, default=None)
    ap.add_argument("--param", required=True, help="config key, e.g. as3.eta, as3.c_p, as3.p0, as3.epsilon, K, m")
    ap.add_argument("--values", required=True)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/sweep.csv")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    K = args.K if args.problem in ("P1", "P2") else None
    base = ExperimentConfig(problem=args.problem, n=args.n, m=args.m, K=K, L=args.L,
                            trials=args.trials, seed_base=args.seed)
    rows = []
    for value in args.values.split(","):
        cfg = apply_overrides(base, {args.param: value})
        res = run_experiment(cfg, jobs=args.jobs)
        med, q25, q75 = median_iqr(res.column("fcalls"))
        rows.append({"param": args.param, "value": value, "successes": res.successes,
                     "fcalls_median": med, "fcalls_q25": q25, "fcalls_q75": q75})
        log.info("%s=%s: %d/%d, median %.0f", args.param, value, res.successes, args.trials, med)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
