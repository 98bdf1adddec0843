"""Optimizer loops for the baseline, adaptive-subset and fixed-subset algorithms."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import cma_engine as cma
from ..as3 import (
    ScenarioProbabilities,
    ScenarioSubset,
    chi2_quantile,
    compute_cn_adaptive,
    compute_cn_fixed,
    mahalanobis_sq,
    nonsupport_count,
    sample_subset_bernoulli,
    sample_subset_fixed,
    update_probabilities,
)
from ..cma_engine import Outcome, RestartPolicy, TerminationStatus
from ..worstcase import FCallCounter, UndefinedCorrelation, WorstCaseProblem, evaluate_batch, kendall_tau, subset_support_ratios
from .config import Algorithm, ExperimentConfig

TRACE_COLUMNS = ("iteration", "fcalls", "F_mt", "sum_p", "subset_size", "tau", "restarts")


def trial_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent ("scenario", "candidate") generators derived from one master seed."""
    scenario, candidate = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(scenario), np.random.default_rng(candidate)


@dataclass
class RunTrace:
    algorithm: str
    problem: str
    seed: int
    budget: int
    trial: int = 0
    iteration: list = field(default_factory=list)
    fcalls: list = field(default_factory=list)
    F_mt: list = field(default_factory=list)
    sum_p: list = field(default_factory=list)
    subset_size: list = field(default_factory=list)
    tau: list = field(default_factory=list)
    restarts: list = field(default_factory=list)
    outcome: TerminationStatus = TerminationStatus(Outcome.RUNNING)
    optimal_value: Optional[float] = None
    final_subset: Optional[list] = None
    final_p: Optional[list] = None
    final_mean: Optional[list] = None
    shadow_fcalls: int = 0
    claimed_support: Optional[list] = None

    def record(self, **row) -> None:
        for key in TRACE_COLUMNS:
            getattr(self, key).append(row[key])

    @property
    def success(self) -> bool:
        return self.outcome.outcome is Outcome.SUCCESS

    @property
    def fcalls_used(self) -> int:
        return self.fcalls[-1] if self.fcalls else 0

    @property
    def fcalls_to_success(self) -> int:
        """f-calls spent to reach the target; failures count as the whole budget."""
        return self.fcalls_used if self.success else self.budget

    @property
    def restart_count(self) -> int:
        return self.restarts[-1] if self.restarts else 0

    @property
    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.F_mt, dtype=float))

    @property
    def best(self) -> float:
        return float(np.min(self.F_mt)) if self.F_mt else math.nan

    def support_ratios(self) -> tuple[float, float]:
        if not self.claimed_support or self.final_subset is None:
            return math.nan, math.nan
        return subset_support_ratios(self.final_subset, self.claimed_support)


def run(config: ExperimentConfig, seed: int, problem: Optional[WorstCaseProblem] = None) -> RunTrace:
    """One run of the configured algorithm.

    Per iteration: draw the scenario subset (scenario stream), sample
    candidates (candidate stream), evaluate them on the subset, update the
    search distribution, then update the scenario probabilities using the
    region of the distribution the candidates came from.  The mean's full
    worst-case value and optional Kendall tau go to a shadow counter.
    """
    problem = config.build_problem() if problem is None else problem
    algo = config.algorithm
    adaptive = algo is Algorithm.AS3_ADAPTIVE
    fixed = algo is Algorithm.AS3_FIXED
    uses_p = adaptive or fixed
    n, m = problem.n, problem.m
    budget = config.budget_fcalls
    thr = config.thresholds
    a3 = config.as3

    scen_rng, cand_rng = trial_streams(seed)
    counter, shadow = FCallCounter(), FCallCounter()
    all_idx = np.arange(m)
    full = ScenarioSubset.full(m)

    f_star = None
    if problem.known_optimum is not None:
        f_star = float(problem.values(problem.known_optimum, all_idx).max())
        shadow.add(m)

    lo, hi = config.init_box
    state = cma.init(n, cand_rng.uniform(lo, hi), config.sigma0)

    c_p = a3.resolved_c_p(fixed)
    eps = a3.resolved_epsilon(m)
    lambda_s = a3.lambda_s
    if fixed and not 1 <= lambda_s <= m:
        raise ValueError(f"lambda_s must lie in [1, {m}]")

    def fresh_probs():
        return ScenarioProbabilities.uniform(m, min(1.0, max(a3.resolved_p0(m, fixed), eps)), eps)

    probs = fresh_probs() if uses_p else None
    quantile = chi2_quantile(n, a3.gamma) if uses_p else None

    trace = RunTrace(algorithm=algo.value, problem=problem.name, seed=seed, budget=budget, optimal_value=f_star)
    if problem.claimed_support is not None:
        trace.claimed_support = sorted(problem.claimed_support)
    restarts = 0
    iteration = 0
    subset = full

    while True:
        if counter.total >= budget:
            trace.outcome = TerminationStatus(Outcome.FAIL_BUDGET, f"{counter.total} f-calls >= budget {budget}")
            break
        if adaptive:
            subset = sample_subset_bernoulli(probs, scen_rng)
        elif fixed:
            subset = sample_subset_fixed(probs, lambda_s, scen_rng)

        X = cma.ask(state, cand_rng)
        vals, F, support = evaluate_batch(problem, X, subset, counter)

        tau = math.nan
        if config.track_tau:
            true_F = problem.values(X, all_idx).max(axis=1)
            shadow.add(X.shape[0] * m)
            try:
                tau = kendall_tau(true_F, F)
            except UndefinedCorrelation:
                pass

        if uses_p:
            region = mahalanobis_sq(X, state) <= quantile
        new_state = cma.tell(state, X, F)
        if uses_p:
            if adaptive:
                c_n = compute_cn_adaptive(c_p, a3.eta, state.lambda_x, m)
            else:
                c_n = compute_cn_fixed(c_p, state.lambda_x, nonsupport_count(vals, F))
            probs = update_probabilities(probs, subset, support, region, c_p, c_n)
        state = new_state
        iteration += 1

        F_mt = float(problem.values(state.mean, all_idx).max())
        shadow.add(m)
        gap = abs(F_mt - f_star) if f_star is not None else None
        trace.record(
            iteration=iteration,
            fcalls=counter.total,
            F_mt=F_mt,
            sum_p=float(probs.p.sum()) if uses_p else float(m),
            subset_size=len(subset),
            tau=tau,
            restarts=restarts,
        )

        status = cma.check_termination(state, gap, counter.total, budget, thr)
        if status.running and thr.coord_var is not None and cma.coordinate_std_termination(state, thr.coord_var):
            status = TerminationStatus(Outcome.FAIL_SIGMA, f"max diag covariance < {thr.coord_var:g}")
        if status.running:
            continue
        if status.outcome in (Outcome.SUCCESS, Outcome.FAIL_BUDGET) or config.restart_policy is RestartPolicy.NONE:
            trace.outcome = status
            break
        state = cma.restart(state, config.restart_policy, (lo, hi), config.sigma0, cand_rng)
        if uses_p:
            probs = fresh_probs()
        restarts += 1

    trace.final_subset = subset.indices.tolist()
    trace.final_p = probs.p.tolist() if uses_p else [1.0] * m
    trace.final_mean = state.mean.tolist()
    trace.shadow_fcalls = shadow.total
    return trace


def run_baseline(config: ExperimentConfig, seed: int, problem=None) -> RunTrace:
    if config.algorithm is not Algorithm.BASELINE:
        raise ValueError("run_baseline needs algorithm=Baseline")
    return run(config, seed, problem)


def run_as3(config: ExperimentConfig, seed: int, problem=None) -> RunTrace:
    if config.algorithm is not Algorithm.AS3_ADAPTIVE:
        raise ValueError("run_as3 needs algorithm=As3Adaptive")
    return run(config, seed, problem)


def run_as3_fixed(config: ExperimentConfig, seed: int, problem=None) -> RunTrace:
    if config.algorithm is not Algorithm.AS3_FIXED:
        raise ValueError("run_as3_fixed needs algorithm=As3Fixed")
    return run(config, seed, problem)


def _run_trial(args) -> RunTrace:
    config, trial = args
    trace = run(config, config.seed_base + trial)
    trace.trial = trial
    return trace


def trial_summary(trace: RunTrace) -> dict:
    hit, excess = trace.support_ratios()
    return {
        "trial": trace.trial,
        "seed": trace.seed,
        "algorithm": trace.algorithm,
        "problem": trace.problem,
        "success": trace.success,
        "outcome": trace.outcome.outcome.value,
        "fcalls": trace.fcalls_to_success,
        "fcalls_used": trace.fcalls_used,
        "iterations": len(trace.iteration),
        "restarts": trace.restart_count,
        "best": trace.best,
        "final_sum_p": trace.sum_p[-1] if trace.sum_p else math.nan,
        "final_subset_size": len(trace.final_subset or []),
        "hit_ratio": hit,
        "excess_ratio": excess,
    }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list

    @property
    def table(self) -> list:
        return [trial_summary(t) for t in self.traces]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.table], dtype=float)

    @property
    def successes(self) -> int:
        return sum(t.success for t in self.traces)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    """Run ``config.trials`` independent trials with seeds ``seed_base + i``."""
    if config.trials < 1:
        raise ValueError("no trials to aggregate")
    work = [(config, i) for i in range(config.trials)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            traces = list(pool.map(_run_trial, work))
    else:
        problem = config.build_problem()
        traces = []
        for cfg, i in work:
            t = run(cfg, cfg.seed_base + i, problem)
            t.trial = i
            traces.append(t)
    return ExperimentResult(config, traces)
