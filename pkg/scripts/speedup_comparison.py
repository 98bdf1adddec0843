"""Baseline vs adaptive vs fixed-subset f-calls on the analytic problems.

Writes one CSV row per (problem, algorithm) with success counts, median and
IQR of f-calls (failures counted at the budget) and the U-test p-value
against the baseline.

    python scripts/speedup_comparison.py --trials 20 --out results/speedup.csv
"""
import argparse
import csv
import logging
from pathlib import Path

from as3cma.as3 import As3Config
from as3cma.harness import Algorithm, ExperimentConfig, mann_whitney_u, median_iqr, run_experiment

log = logging.getLogger("speedup")

PROBLEMS = {
    "P1": dict(n=10, m=100, K=5),
    "P2": dict(n=10, m=100, K=5),
    "P3": dict(n=10, m=100),
    "P4": dict(n=10, m=100, L=5),
    "P5": dict(n=10, m=50),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=1_000_000)
    ap.add_argument("--problems", default=",".join(PROBLEMS))
    ap.add_argument("--lambda-s", type=int, default=None, help="fixed subset size (default: claimed support size)")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/speedup.csv")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    rows = []
    for name in args.problems.split(","):
        base = ExperimentConfig(problem=name, trials=args.trials, seed_base=args.seed,
                                budget_fcalls=args.budget, **PROBLEMS[name])
        lam_s = args.lambda_s or len(base.build_problem().claimed_support)
        variants = {
            "Baseline": base.replace(algorithm=Algorithm.BASELINE),
            "As3Adaptive": base.replace(algorithm=Algorithm.AS3_ADAPTIVE),
            "As3Fixed": base.replace(algorithm=Algorithm.AS3_FIXED, as3=As3Config(lambda_s=lam_s)),
        }
        ref = None
        for algo, cfg in variants.items():
            log.info("%s %s", name, algo)
            res = run_experiment(cfg, jobs=args.jobs)
            fc = res.column("fcalls")
            med, q25, q75 = median_iqr(fc)
            if ref is None:
                ref = fc
            p = mann_whitney_u(fc, ref)[1] if algo != "Baseline" else float("nan")
            rows.append({
                "problem": name, "algorithm": algo, "successes": res.successes, "trials": args.trials,
                "fcalls_median": med, "fcalls_q25": q25, "fcalls_q75": q75,
                "ratio_to_baseline": med / median_iqr(ref)[0], "p_vs_baseline": p,
            })
            log.info("  %d/%d success, median %.0f f-calls", res.successes, args.trials, med)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    log.info("wrote %s", out)


if __name__ == "__main__":
    main()
