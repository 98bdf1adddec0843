"""Adaptive scenario subset selection.

Scenario indices are 0-based throughout.  Each scenario carries an
inclusion probability in ``[epsilon, 1]``; a subset is drawn from these
probabilities every iteration and the probabilities are nudged towards the
scenarios that actually attain the worst case inside the high-density
region of the current search distribution.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import brentq
from scipy.special import gammainc

from .cma_engine import SearchDistribution


@dataclass
class ScenarioProbabilities:
    p: np.ndarray
    epsilon: float

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        if self.p.ndim != 1 or self.p.size < 1:
            raise ValueError("need at least one scenario")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if np.any(self.p < self.epsilon) or np.any(self.p > 1):
            raise ValueError("probabilities must lie in [epsilon, 1]")

    @property
    def m(self) -> int:
        return self.p.size

    @classmethod
    def uniform(cls, m: int, p0: float, epsilon: float) -> "ScenarioProbabilities":
        return cls(np.full(m, float(p0)), float(epsilon))


@dataclass(frozen=True)
class ScenarioSubset:
    """Nonempty, strictly increasing scenario indices."""

    indices: np.ndarray = field(compare=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.intp)
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("subset must be nonempty")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("subset indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return self.indices.size

    def __iter__(self):
        return iter(self.indices.tolist())

    def __contains__(self, s) -> bool:
        return bool(np.any(self.indices == s))

    def __eq__(self, other) -> bool:
        return isinstance(other, ScenarioSubset) and np.array_equal(self.indices, other.indices)

    def __hash__(self) -> int:
        return hash(tuple(self.indices.tolist()))

    @classmethod
    def full(cls, m: int) -> "ScenarioSubset":
        return cls(np.arange(m))


@dataclass(frozen=True)
class As3Config:
    """AS3 hyper-parameters.

    ``None`` selects the variant default: ``c_p`` is 0.3 (adaptive) or 0.1
    (fixed size), ``p0`` is 0.1 or ``lambda_s / m``, ``epsilon`` is ``1 / m``.
    """

    c_p: Optional[float] = None
    eta: float = 0.3
    gamma: float = 0.99
    epsilon: Optional[float] = None
    p0: Optional[float] = None
    lambda_s: Optional[int] = None  # fixed-size variant only

    def resolved_c_p(self, fixed: bool = False) -> float:
        if self.c_p is not None:
            return self.c_p
        return 0.1 if fixed else 0.3

    def resolved_epsilon(self, m: int) -> float:
        return 1.0 / m if self.epsilon is None else self.epsilon

    def resolved_p0(self, m: int, fixed: bool = False) -> float:
        if self.p0 is not None:
            return self.p0
        return self.lambda_s / m if fixed else 0.1


def chi2_quantile(n: int, gamma: float) -> float:
    """gamma-quantile of the chi-squared distribution with ``n`` degrees of freedom.

    Solved by bracketed root-finding on the regularized lower incomplete
    gamma function, ``P(n/2, q/2) = gamma``.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if n < 1:
        raise ValueError("degrees of freedom must be >= 1")
    a = n / 2.0

    def cdf_gap(q):
        return gammainc(a, q / 2.0) - gamma

    hi = max(1.0, 2.0 * n)
    while cdf_gap(hi) < 0:
        hi *= 2.0
    return brentq(cdf_gap, 0.0, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps, maxiter=500)


def mahalanobis_sq(X: np.ndarray, state: SearchDistribution) -> np.ndarray:
    """Squared Mahalanobis distances of the rows of ``X`` under N(mean, sigma^2 C)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != state.n:
        raise ValueError("dimension mismatch")
    L = state.cholesky()
    Z = solve_triangular(L, (X - state.mean).T, lower=True) / state.step_size
    return np.sum(Z * Z, axis=0)


def in_region(x, state: SearchDistribution, gamma: float, quantile: Optional[float] = None):
    """Whether ``x`` (a point or rows of points) lies in the gamma-mass ellipsoid."""
    q = chi2_quantile(state.n, gamma) if quantile is None else quantile
    x = np.asarray(x, dtype=float)
    d = mahalanobis_sq(x, state)
    inside = d <= q
    return bool(inside[0]) if x.ndim == 1 else inside


def sample_subset_bernoulli(probs: ScenarioProbabilities, rng: np.random.Generator) -> ScenarioSubset:
    """Independent Bernoulli inclusion, with one categorical draw if nothing got in."""
    keep = rng.random(probs.m) < probs.p
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        idx = np.array([rng.choice(probs.m, p=probs.p / probs.p.sum())])
    return ScenarioSubset(idx)


def sample_subset_fixed(probs: ScenarioProbabilities, lambda_s: int, rng: np.random.Generator) -> ScenarioSubset:
    """``lambda_s`` distinct scenarios by repeated categorical draws, rejecting duplicates."""
    m = probs.m
    if not 1 <= lambda_s <= m:
        raise ValueError(f"lambda_s must lie in [1, {m}], got {lambda_s}")
    weights = probs.p / probs.p.sum()
    cdf = np.cumsum(weights)
    chosen: set[int] = set()
    while len(chosen) < lambda_s:
        s = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        chosen.add(min(s, m - 1))
    return ScenarioSubset(np.array(sorted(chosen)))


def compute_cn_adaptive(c_p: float, eta: float, lambda_x: int, m: int) -> float:
    el = eta * lambda_x
    return c_p * el / max(m - el - 1, el)


def compute_cn_fixed(c_p: float, lambda_x: int, nonsupport_count: int) -> float:
    # zero when no scenario receives the decrease term anyway
    if nonsupport_count < 0:
        raise ValueError("nonsupport_count must be >= 0")
    if nonsupport_count == 0:
        return 0.0
    return c_p * lambda_x / nonsupport_count


def nonsupport_count(values: np.ndarray, worst: np.ndarray) -> int:
    """Scenarios of the subset strictly below the subset worst case for every candidate."""
    below = values < worst[:, None]
    return int(np.sum(np.all(below, axis=0)))


def compute_delta(
    m: int,
    subset: ScenarioSubset,
    support_flags: np.ndarray,
    region_flags: np.ndarray,
    c_p: float,
    c_n: float,
) -> np.ndarray:
    """Unclipped probability increments.

    ``support_flags`` has shape ``(lambda_x, len(subset))``; column ``j``
    refers to scenario ``subset.indices[j]``.  ``region_flags`` has shape
    ``(lambda_x,)``.
    """
    support_flags = np.asarray(support_flags, dtype=bool)
    region_flags = np.asarray(region_flags, dtype=bool)
    if support_flags.ndim != 2 or support_flags.shape[1] != len(subset):
        raise ValueError(f"support flags must have {len(subset)} columns, got shape {support_flags.shape}")
    if region_flags.shape != (support_flags.shape[0],):
        raise ValueError("region flags must have one entry per candidate")
    hits = np.sum(support_flags & region_flags[:, None], axis=0)
    delta = np.zeros(m)
    delta[subset.indices] = c_p * hits - c_n * (hits == 0)
    return delta


def update_probabilities(
    probs: ScenarioProbabilities,
    subset: ScenarioSubset,
    support_flags: np.ndarray,
    region_flags: np.ndarray,
    c_p: float,
    c_n: float,
) -> ScenarioProbabilities:
    delta = compute_delta(probs.m, subset, support_flags, region_flags, c_p, c_n)
    p = np.clip(probs.p + delta, probs.epsilon, 1.0)
    return ScenarioProbabilities(p, probs.epsilon)
