"""Worst-case evaluation over scenario subsets, f-call accounting and diagnostics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
from scipy import stats

from .as3 import ScenarioSubset

# (X of shape (k, n), 0-based scenario indices of shape (q,)) -> values of shape (k, q)
BatchObjective = Callable[[np.ndarray, np.ndarray], np.ndarray]


class NonFiniteValueError(ValueError):
    def __init__(self, x, s, value):
        super().__init__(f"f(x, {s}) = {value} is not finite at x = {np.array2string(np.asarray(x))}")
        self.x = np.asarray(x)
        self.s = s
        self.value = value


class UndefinedCorrelation(ValueError):
    """Kendall's tau is undefined because one input is entirely tied."""


@dataclass
class WorstCaseProblem:
    """A family ``f(x, s)`` over ``n`` design variables and ``m`` scenarios.

    ``evaluate`` works on batches and must be pure.  When ``domain`` is set,
    points are clipped into the box before evaluation.
    """

    n: int
    m: int
    evaluate: BatchObjective
    name: str = "problem"
    known_optimum: Optional[np.ndarray] = None
    domain: Optional[tuple[np.ndarray, np.ndarray]] = None
    claimed_support: Optional[frozenset] = None
    params: dict = field(default_factory=dict)

    def values(self, X, idx) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n:
            raise ValueError(f"expected points of dimension {self.n}, got {X.shape[1]}")
        idx = np.asarray(idx, dtype=np.intp)
        if idx.size and (idx.min() < 0 or idx.max() >= self.m):
            raise IndexError(f"scenario index out of range [0, {self.m})")
        if self.domain is not None:
            X = np.clip(X, self.domain[0], self.domain[1])
        return np.asarray(self.evaluate(X, idx), dtype=float)

    def f(self, x, s: int) -> float:
        return float(self.values(x, [s])[0, 0])

    def worst(self, x) -> float:
        """F(x) over all scenarios, without accounting."""
        return float(self.values(x, np.arange(self.m)).max())

    def optimal_value(self) -> Optional[float]:
        if self.known_optimum is None:
            return None
        return self.worst(self.known_optimum)


@dataclass
class FCallCounter:
    total: int = 0

    def add(self, k: int) -> None:
        if k < 0:
            raise ValueError("f-call increments must be non-negative")
        self.total += int(k)


@dataclass
class EvaluationRecord:
    candidate: np.ndarray
    subset: ScenarioSubset
    values: np.ndarray
    worst_value: float
    supporting: frozenset
    in_region: Optional[bool] = None


def _check_finite(X, idx, vals):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        k, j = np.argwhere(bad)[0]
        raise NonFiniteValueError(X[k], int(idx[j]), vals[k, j])


def evaluate_batch(problem: WorstCaseProblem, X, subset: ScenarioSubset, counter: FCallCounter):
    """Evaluate each row of ``X`` on ``subset``.

    Returns ``(values, worst, support)`` with shapes ``(k, q)``, ``(k,)`` and
    ``(k, q)``.  Support uses exact equality with the row maximum, which is
    taken over these very values.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    idx = subset.indices
    vals = problem.values(X, idx)
    counter.add(X.shape[0] * idx.size)
    _check_finite(X, idx, vals)
    worst = vals.max(axis=1)
    return vals, worst, vals == worst[:, None]


def evaluate_subset(problem: WorstCaseProblem, x, subset: ScenarioSubset, counter: FCallCounter) -> EvaluationRecord:
    x = np.asarray(x, dtype=float)
    vals, worst, support = evaluate_batch(problem, x[None, :], subset, counter)
    return EvaluationRecord(
        candidate=x,
        subset=subset,
        values=vals[0],
        worst_value=float(worst[0]),
        supporting=frozenset(subset.indices[support[0]].tolist()),
    )


def evaluate_full(problem: WorstCaseProblem, x, counter: FCallCounter) -> EvaluationRecord:
    return evaluate_subset(problem, x, ScenarioSubset.full(problem.m), counter)


def kendall_tau(a, b) -> float:
    """Tie-corrected Kendall tau-b over all pairs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be 1-D and of equal length")
    if a.size < 2:
        raise ValueError("need at least two observations")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise UndefinedCorrelation("all values tied in at least one input")
    return float(stats.kendalltau(a, b, variant="b").statistic)


def argmax_sets(problem: WorstCaseProblem, X, counter: Optional[FCallCounter] = None) -> set:
    """Union over rows of ``X`` of the exact-argmax scenario sets."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    idx = np.arange(problem.m)
    vals = problem.values(X, idx)
    if counter is not None:
        counter.add(vals.size)
    hit = np.any(vals == vals.max(axis=1, keepdims=True), axis=0)
    return set(np.flatnonzero(hit).tolist())


def support_oracle(
    problem: WorstCaseProblem,
    region_sampler: Iterable,
    sample_count: int,
    counter: Optional[FCallCounter] = None,
    batch: int = 4096,
) -> set:
    """Brute-force estimate of the support scenarios of a neighbourhood.

    Takes ``sample_count`` points from ``region_sampler`` (an iterable of
    points, or a callable ``k -> (k, n) array``), evaluates every scenario
    at each of them and returns the union of the argmax sets.  The estimate
    grows monotonically with the number of samples.  f-calls go to
    ``counter``, which should never be an optimisation budget.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    found: set = set()
    if callable(region_sampler):
        remaining = sample_count
        while remaining > 0:
            k = min(batch, remaining)
            found |= argmax_sets(problem, region_sampler(k), counter)
            remaining -= k
        return found
    it = iter(region_sampler)
    buf = []
    for _ in range(sample_count):
        buf.append(np.asarray(next(it), dtype=float))
        if len(buf) == batch:
            found |= argmax_sets(problem, np.array(buf), counter)
            buf = []
    if buf:
        found |= argmax_sets(problem, np.array(buf), counter)
    return found


def ball_sampler(center, radius: float, rng: np.random.Generator):
    """Uniform samples from the Euclidean ball, as a batch callable."""
    center = np.asarray(center, dtype=float)
    n = center.size

    def draw(k):
        d = rng.standard_normal((k, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = radius * rng.random(k) ** (1.0 / n)
        return center + d * r[:, None]

    return draw


def ellipsoid_sampler(mean, cov, quantile: float, rng: np.random.Generator):
    """Uniform samples from ``{x : (x-mean)^T cov^-1 (x-mean) <= quantile}``."""
    mean = np.asarray(mean, dtype=float)
    L = np.linalg.cholesky(np.asarray(cov, dtype=float))
    unit = ball_sampler(np.zeros(mean.size), np.sqrt(quantile), rng)

    def draw(k):
        return mean + unit(k) @ L.T

    return draw


def subset_support_ratios(subset, support_set) -> tuple[float, float]:
    """(|A & S*| / |S*|, |A - S*| / |S*|)."""
    support = set(support_set)
    if not support:
        raise ValueError("support set must be nonempty")
    a = set(subset)
    return len(a & support) / len(support), len(a - support) / len(support)
