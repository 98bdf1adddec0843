"""(mu/mu_w, lambda)-CMA-ES with an ask/tell interface.

Standard cumulative step-size adaptation and rank-one + rank-mu covariance
update with the textbook default learning rates.  The state is a plain
dataclass; :func:`tell` returns a fresh state and never mutates its input,
which keeps rank-invariance and determinism easy to check.
"""
from __future__ import annotations

import copy
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class CorruptedStateError(RuntimeError):
    """The shape matrix is no longer positive definite."""


def default_lambda(n: int) -> int:
    """Default population size ``floor(4 + 3 ln n)``."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return int(math.floor(4 + 3 * math.log(n)))


def recombination_weights(lambda_x: int) -> np.ndarray:
    """Log-decreasing weights; the best ``lambda_x // 2`` are positive and sum to 1."""
    mu = lambda_x // 2
    raw = math.log((lambda_x + 1) / 2) - np.log(np.arange(1, lambda_x + 1))
    w = np.zeros(lambda_x)
    w[:mu] = raw[:mu] / raw[:mu].sum()
    return w


@dataclass(frozen=True)
class LearningRates:
    mu: int
    mueff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float

    @classmethod
    def default(cls, n: int, weights: np.ndarray) -> "LearningRates":
        pos = weights[weights > 0]
        mueff = 1.0 / float(np.sum(pos**2))
        c_sigma = (mueff + 2) / (n + mueff + 5)
        d_sigma = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (n + 1)) - 1) + c_sigma
        c_c = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        c_1 = 2 / ((n + 1.3) ** 2 + mueff)
        c_mu = min(1 - c_1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))
        return cls(len(pos), mueff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n)


@dataclass
class SearchDistribution:
    """Sampling distribution N(mean, step_size**2 * shape) plus CMA-ES internals."""

    mean: np.ndarray
    step_size: float
    shape: np.ndarray
    path_sigma: np.ndarray
    path_cov: np.ndarray
    lambda_x: int
    iteration: int
    recombination_weights: np.ndarray
    rates: LearningRates
    pending: Optional[np.ndarray] = field(default=None, repr=False)
    _eigvals: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    @property
    def covariance(self) -> np.ndarray:
        return self.step_size**2 * self.shape

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of ``shape``, computed at most once per iteration."""
        if self._eigvals is None:
            self._eigvals = np.linalg.eigvalsh(self.shape)
        return self._eigvals

    def condition_number(self) -> float:
        ev = self.eigenvalues()
        if ev[0] <= 0:
            return math.inf
        return float(ev[-1] / ev[0])

    def cholesky(self) -> np.ndarray:
        try:
            return np.linalg.cholesky(self.shape)
        except np.linalg.LinAlgError as exc:
            raise CorruptedStateError("shape matrix is not positive definite") from exc


def init(
    n: int,
    mean0: Sequence[float],
    sigma0: float,
    shape0: Optional[np.ndarray] = None,
    lambda_x: Optional[int] = None,
) -> SearchDistribution:
    mean = np.asarray(mean0, dtype=float).copy()
    if mean.shape != (n,):
        raise ValueError(f"mean0 must have shape ({n},), got {mean.shape}")
    if not sigma0 > 0:
        raise ValueError("sigma0 must be positive")
    shape = np.eye(n) if shape0 is None else np.array(shape0, dtype=float)
    if shape.shape != (n, n):
        raise ValueError(f"shape0 must be {n}x{n}")
    if not np.allclose(shape, shape.T):
        raise ValueError("shape0 must be symmetric")
    try:
        np.linalg.cholesky(shape)
    except np.linalg.LinAlgError as exc:
        raise ValueError("shape0 must be positive definite") from exc
    lam = default_lambda(n) if lambda_x is None else int(lambda_x)
    if lam < 2:
        raise ValueError("lambda_x must be >= 2")
    w = recombination_weights(lam)
    return SearchDistribution(
        mean=mean,
        step_size=float(sigma0),
        shape=shape,
        path_sigma=np.zeros(n),
        path_cov=np.zeros(n),
        lambda_x=lam,
        iteration=0,
        recombination_weights=w,
        rates=LearningRates.default(n, w),
    )


def ask(state: SearchDistribution, rng: np.random.Generator) -> np.ndarray:
    """Draw ``lambda_x`` candidates as rows of a ``(lambda_x, n)`` array."""
    L = state.cholesky()
    z = rng.standard_normal((state.lambda_x, state.n))
    x = state.mean + state.step_size * z @ L.T
    state.pending = x
    return x.copy()


def tell(state: SearchDistribution, candidates: np.ndarray, fitness: Sequence[float]) -> SearchDistribution:
    """Update from ``lambda_x`` (candidate, fitness) pairs; lower fitness is better."""
    X = np.asarray(candidates, dtype=float)
    f = np.asarray(fitness, dtype=float)
    lam, n = state.lambda_x, state.n
    if X.shape != (lam, n) or f.shape != (lam,):
        raise ValueError(f"expected {lam} candidates of dimension {n}, got {X.shape} / {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("fitness values must be finite")
    if state.pending is not None and state.pending.shape != X.shape:
        raise ValueError("candidate count does not match the preceding ask")

    r = state.rates
    w = state.recombination_weights
    order = np.argsort(f, kind="stable")
    y = (X[order] - state.mean) / state.step_size
    yw = w @ y

    evals, B = np.linalg.eigh(state.shape)
    if evals[0] <= 0:
        raise CorruptedStateError("shape matrix is not positive definite")
    inv_sqrt = (B / np.sqrt(evals)) @ B.T

    mean = state.mean + state.step_size * yw
    ps = (1 - r.c_sigma) * state.path_sigma + math.sqrt(r.c_sigma * (2 - r.c_sigma) * r.mueff) * inv_sqrt @ yw
    g = state.iteration + 1
    ps_norm = float(np.linalg.norm(ps))
    h_sigma = ps_norm / math.sqrt(1 - (1 - r.c_sigma) ** (2 * g)) < (1.4 + 2 / (n + 1)) * r.chi_n
    pc = (1 - r.c_c) * state.path_cov
    if h_sigma:
        pc = pc + math.sqrt(r.c_c * (2 - r.c_c) * r.mueff) * yw
    delta_h = 0.0 if h_sigma else r.c_c * (2 - r.c_c)

    rank_mu = (y.T * w) @ y
    C = (1 + r.c_1 * delta_h - r.c_1 - r.c_mu * w.sum()) * state.shape
    C = C + r.c_1 * np.outer(pc, pc) + r.c_mu * rank_mu
    C = (C + C.T) / 2
    sigma = state.step_size * math.exp(min(1.0, (r.c_sigma / r.d_sigma) * (ps_norm / r.chi_n - 1)))

    return SearchDistribution(
        mean=mean,
        step_size=sigma,
        shape=C,
        path_sigma=ps,
        path_cov=pc,
        lambda_x=lam,
        iteration=g,
        recombination_weights=w,
        rates=r,
    )


class Outcome(enum.Enum):
    RUNNING = "Running"
    SUCCESS = "Success"
    FAIL_SIGMA = "FailSigma"
    FAIL_CONDITION = "FailCondition"
    FAIL_BUDGET = "FailBudget"


@dataclass(frozen=True)
class TerminationStatus:
    outcome: Outcome
    detail: str = ""

    @property
    def running(self) -> bool:
        return self.outcome is Outcome.RUNNING


@dataclass(frozen=True)
class Thresholds:
    gap: float = 1e-12
    sigma_min: float = 1e-12
    cond_max: float = 1e14
    coord_var: Optional[float] = None


def check_termination(
    state: SearchDistribution,
    best_gap: Optional[float],
    fcalls_used: int,
    budget: int,
    thresholds: Thresholds = Thresholds(),
) -> TerminationStatus:
    """Success on a small gap, else budget, step-size and conditioning failures in that order.

    ``best_gap`` is None when the optimum is unknown; success is then never declared.
    """
    if best_gap is not None and best_gap < thresholds.gap and fcalls_used <= budget:
        return TerminationStatus(Outcome.SUCCESS, f"gap {best_gap:.3e} < {thresholds.gap:g}")
    if fcalls_used >= budget:
        return TerminationStatus(Outcome.FAIL_BUDGET, f"{fcalls_used} f-calls >= budget {budget}")
    if state.step_size < thresholds.sigma_min:
        return TerminationStatus(Outcome.FAIL_SIGMA, f"sigma {state.step_size:.3e} < {thresholds.sigma_min:g}")
    cond = state.condition_number()
    if cond > thresholds.cond_max:
        return TerminationStatus(Outcome.FAIL_CONDITION, f"cond(C) {cond:.3e} > {thresholds.cond_max:g}")
    return TerminationStatus(Outcome.RUNNING)


def coordinate_std_termination(state: SearchDistribution, threshold: float = 1e-8) -> bool:
    """True iff the largest diagonal entry of the covariance is below ``threshold``."""
    return float(np.max(np.diag(state.shape)) * state.step_size**2) < threshold


class RestartPolicy(enum.Enum):
    NONE = "None"
    SIMPLE = "Simple"
    DOUBLE_LAMBDA = "DoubleLambda"


def restart(
    state: SearchDistribution,
    policy: RestartPolicy,
    init_box: tuple[np.ndarray, np.ndarray],
    sigma0: float,
    rng: np.random.Generator,
    shape0: Optional[np.ndarray] = None,
) -> SearchDistribution:
    """Fresh distribution with a uniformly drawn mean; doubles lambda_x under DoubleLambda."""
    lo, hi = (np.asarray(b, dtype=float) for b in init_box)
    lam = state.lambda_x * 2 if policy is RestartPolicy.DOUBLE_LAMBDA else state.lambda_x
    mean = rng.uniform(lo, hi)
    return init(state.n, mean, sigma0, shape0, lam)


def snapshot(state: SearchDistribution) -> SearchDistribution:
    return copy.deepcopy(state)
