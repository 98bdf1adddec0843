"""Analytic min-max test problems P1-P5.

All five have their worst-case optimum at the origin and a controllable set
of support scenarios there.  Scenario ``s`` here is 0-based; the formulas
are written with ``s1 = s + 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..worstcase import WorstCaseProblem

FAMILIES = ("P1", "P2", "P3", "P4", "P5")


@dataclass(frozen=True)
class ProblemParams:
    family: str
    n: int
    m: int
    K: Optional[int] = None
    L: Optional[int] = None

    def validate(self) -> None:
        f, n, m, K, L = self.family, self.n, self.m, self.K, self.L
        if f in ("P1", "P2"):
            if n < 2 or m < 2 or K is None or not 2 <= K <= m:
                raise ValueError(f"{f} needs n >= 2, m >= 2 and 2 <= K <= m (got n={n}, m={m}, K={K})")
        elif f == "P3":
            if n < 1 or m < 2 * n:
                raise ValueError(f"P3 needs n >= 1 and m >= 2n (got n={n}, m={m})")
        elif f == "P4":
            if n < 1 or L is None or not 2 <= L <= m or m % L:
                raise ValueError(f"P4 needs m >= L >= 2 with L dividing m (got m={m}, L={L})")
        elif f == "P5":
            if n < 1 or m < 2:
                raise ValueError(f"P5 needs n >= 1 and m >= 2 (got n={n}, m={m})")
        else:
            raise ValueError(f"unknown problem family {f!r}")


def _plane(n: int, angles: np.ndarray, radius=1.0) -> np.ndarray:
    V = np.zeros((angles.size, n))
    V[:, 0] = np.cos(angles)
    if n > 1:
        V[:, 1] = np.sin(angles)
    return V * np.reshape(radius, (-1, 1))


def _ridge_vectors(n: int, m: int, K: int):
    """Directions and curvature shared by P1 and P2."""
    omega = math.pi / K
    alpha = 0.0 if K == 2 else math.cos(omega) ** 2 / math.sin(omega) ** 2
    s1 = np.arange(1, m + 1)
    V = np.zeros((m, n))
    V[:K] = _plane(n, omega * s1[:K])
    if m > K:
        omega_t = 2 * math.pi / (m - K)
        V[K:] = _plane(n, omega_t * (s1[K:] - K))
    return V, alpha


def p1_eval(X: np.ndarray, idx: np.ndarray, V: np.ndarray, alpha: float, K: int) -> np.ndarray:
    Vs = V[idx]
    out = np.empty((X.shape[0], idx.size))
    ridge = idx < K
    sq = np.sum(X * X, axis=1, keepdims=True)
    if ridge.any():
        out[:, ridge] = sq - (1 + alpha) * (X @ Vs[ridge].T) ** 2
    if (~ridge).any():
        D = X[:, None, :] - Vs[~ridge][None, :, :]
        out[:, ~ridge] = 2 * np.sum(D * D, axis=2) - 8
    return out


def p2_eval(X: np.ndarray, idx: np.ndarray, V: np.ndarray, alpha: float, K: int) -> np.ndarray:
    Vs = V[idx]
    out = np.empty((X.shape[0], idx.size))
    ridge = idx < K
    sq = np.sum(X * X, axis=1, keepdims=True)
    if ridge.any():
        out[:, ridge] = sq - (1 + alpha) * (X @ Vs[ridge].T) ** 2
    if (~ridge).any():
        D = X[:, None, :] - Vs[~ridge][None, :, :]
        out[:, ~ridge] = np.sqrt(np.sum(D * D, axis=2)) - 2
    return out


def p3_coefficients(n: int, m: int):
    """Unit directions, shifts and offsets of P3 for each scenario."""
    K = math.ceil(m / (2 * n))
    alpha_t = 5.0 * np.arange(1, K + 1) / K
    beta_t = np.empty(K)
    beta_t[0] = alpha_t[0] ** 2
    for k in range(1, K):
        beta_t[k] = beta_t[k - 1] + (alpha_t[k] + alpha_t[k - 1]) ** 2 - (2 * alpha_t[k - 1]) ** 2
    s1 = np.arange(1, m + 1)
    k = -(-s1 // (2 * n))
    ell = s1 - 2 * n * (k - 1)
    V = np.zeros((m, n))
    V[np.arange(m), -(-ell // 2) - 1] = np.where(ell % 2 == 0, 1.0, -1.0)
    return V, alpha_t[k - 1], beta_t[k - 1], alpha_t, beta_t


def p3_eval(X, idx, V, alpha, beta):
    # <x - a v, v> = <x, v> - a for unit v
    return (X @ V[idx].T - alpha[idx]) ** 2 - beta[idx]


def p4_vectors(n: int, m: int, L: int):
    K = m // L
    s1 = np.arange(1, m + 1)
    k = -(-s1 // L)
    ell = s1 - L * (k - 1)
    return _plane(n, (2 * math.pi / L) * ell, radius=5.0 * k / K), K


def p4_eval(X, idx, V, K):
    Vs = V[idx]
    sq = np.sum(X * X, axis=1, keepdims=True)
    return sq + 2 * X @ Vs.T - np.sum(Vs * Vs, axis=1) + 5.0 / K


def p5_omegas(m: int) -> np.ndarray:
    # integer numerator keeps omega exactly antisymmetric, so mirrored scenarios tie
    return (2.0 * np.arange(m) - (m - 1)) / (m - 1)


def p5_eval(X, idx, omega):
    w = omega[idx]
    sq = np.sum(X * X, axis=1, keepdims=True)
    return sq + X[:, :1] * w - w**2


def claimed_support(params: ProblemParams) -> frozenset:
    """0-based support scenarios at the origin, as stated for each family."""
    f, n, m = params.family, params.n, params.m
    if f in ("P1", "P2"):
        return frozenset(range(params.K))
    if f == "P3":
        return frozenset(range(2 * n))
    if f == "P4":
        return frozenset(range(params.L))
    if m % 2:
        return frozenset({(m - 1) // 2})
    return frozenset({m // 2 - 1, m // 2})


def make_problem(params: ProblemParams) -> WorstCaseProblem:
    params.validate()
    n, m, f = params.n, params.m, params.family
    if f in ("P1", "P2"):
        V, alpha = _ridge_vectors(n, m, params.K)
        fn = p1_eval if f == "P1" else p2_eval
        K = params.K

        def evaluate(X, idx):
            return fn(X, idx, V, alpha, K)

    elif f == "P3":
        V, a, b, _, _ = p3_coefficients(n, m)

        def evaluate(X, idx):
            return p3_eval(X, idx, V, a, b)

    elif f == "P4":
        V, K = p4_vectors(n, m, params.L)

        def evaluate(X, idx):
            return p4_eval(X, idx, V, K)

    else:
        omega = p5_omegas(m)

        def evaluate(X, idx):
            return p5_eval(X, idx, omega)

    return WorstCaseProblem(
        n=n,
        m=m,
        evaluate=evaluate,
        name=f,
        known_optimum=np.zeros(n),
        claimed_support=claimed_support(params),
        params={"family": f, "n": n, "m": m, "K": params.K, "L": params.L},
    )
