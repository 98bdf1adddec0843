"""Summary statistics for multi-trial comparisons."""
from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np
from scipy.special import ndtr

EXACT_MAX_TOTAL = 16


def midranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties given the mean of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    sv = v[order]
    ranks = np.empty(v.size)
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float]:
    """U statistic of ``sample_a`` and a two-sided p-value.

    Exact permutation distribution (midranks, all relabelings) when the
    combined size is at most 16; otherwise the normal approximation with
    tie-corrected variance and continuity correction.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples must be nonempty")
    ranks = midranks(np.concatenate([a, b]))
    u = float(ranks[:n1].sum() - n1 * (n1 + 1) / 2)
    if n1 + n2 <= EXACT_MAX_TOTAL:
        return u, _exact_p(ranks, n1)
    return u, _normal_p(u, ranks, n1, n2)


def _exact_p(ranks: np.ndarray, n1: int) -> float:
    # doubled midranks are integers, so deviations compare exactly
    r2 = np.rint(2 * ranks).astype(np.int64)
    total = r2.sum()
    n = r2.size
    # 2 * (R1 - mean R1) scaled by n to stay integral
    centre = n1 * total

    def dev(sel_sum):
        return abs(n * sel_sum - centre)

    observed = dev(r2[:n1].sum())
    hits = 0
    count = 0
    for combo in itertools.combinations(range(n), n1):
        count += 1
        if dev(r2[list(combo)].sum()) >= observed:
            hits += 1
    return hits / count


def _normal_p(u: float, ranks: np.ndarray, n1: int, n2: int) -> float:
    n = n1 + n2
    _, counts = np.unique(ranks, return_counts=True)
    tie = float(np.sum(counts**3 - counts))
    var = n1 * n2 / 12.0 * ((n + 1) - tie / (n * (n - 1)))
    if var <= 0:
        return 1.0
    mu = n1 * n2 / 2.0
    z = (abs(u - mu) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    return float(min(1.0, 2.0 * ndtr(-z)))


def median_iqr(samples: Sequence[float]) -> tuple[float, float, float]:
    """(median, 25th, 75th percentile) with linear interpolation between order statistics."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("no samples")
    q25, med, q75 = np.percentile(x, [25, 50, 75], method="linear")
    return float(med), float(q25), float(q75)
