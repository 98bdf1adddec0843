import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from as3cma.problems import ProblemParams, make_problem
from as3cma.problems.analytic import p3_coefficients, p5_omegas
from as3cma.worstcase import FCallCounter, ball_sampler, support_oracle


# Scalar, 1-based transcriptions of the five formulas. They share nothing
# with the vectorised evaluators and serve as the reference.

def lit_p1_p2(x, s, n, m, K, family):
    w = math.pi / K
    alpha = 0.0 if K == 2 else 1.0 / math.tan(w) ** 2
    if s <= K:
        v = [math.cos(w * s), math.sin(w * s)] + [0.0] * (n - 2)
        xv = sum(a * b for a, b in zip(x, v))
        return sum(a * a for a in x) - (1 + alpha) * xv * xv
    wt = 2 * math.pi / (m - K)
    v = [math.cos(wt * (s - K)), math.sin(wt * (s - K))] + [0.0] * (n - 2)
    d2 = sum((a - b) ** 2 for a, b in zip(x, v))
    return 2 * d2 - 8 if family == "P1" else math.sqrt(d2) - 2


def lit_p3(x, s, n, m):
    K = math.ceil(m / (2 * n))
    at = [5 * k / K for k in range(1, K + 1)]
    bt = [at[0] ** 2]
    for k in range(1, K):
        bt.append(bt[-1] + (at[k] + at[k - 1]) ** 2 - (2 * at[k - 1]) ** 2)
    k = math.ceil(s / (2 * n))
    ell = s - 2 * n * (k - 1)
    v = [0.0] * n
    v[math.ceil(ell / 2) - 1] = (-1.0) ** ell
    a, b = at[k - 1], bt[k - 1]
    return sum((xi - a * vi) * vi for xi, vi in zip(x, v)) ** 2 - b


def lit_p4(x, s, n, m, L):
    K = m // L
    k = math.ceil(s / L)
    ell = s - L * (k - 1)
    r = 5 * k / K
    ang = 2 * math.pi * ell / L
    v = ([r * math.cos(ang), r * math.sin(ang)] + [0.0] * n)[:n]
    return sum(a * a for a in x) + 2 * sum(a * b for a, b in zip(x, v)) - sum(b * b for b in v) + 5 / K


def lit_p5(x, s, m):
    w = 2 * (s - 1) / (m - 1) - 1
    return sum(a * a for a in x) + x[0] * w - w * w


def literal(params, x, s):
    f = params.family
    if f in ("P1", "P2"):
        return lit_p1_p2(x, s, params.n, params.m, params.K, f)
    if f == "P3":
        return lit_p3(x, s, params.n, params.m)
    if f == "P4":
        return lit_p4(x, s, params.n, params.m, params.L)
    return lit_p5(x, s, params.m)


INSTANCES = [
    ProblemParams("P1", 2, 4, K=2),
    ProblemParams("P1", 3, 12, K=5),
    ProblemParams("P1", 10, 30, K=10),
    ProblemParams("P2", 2, 6, K=3),
    ProblemParams("P2", 10, 30, K=10),
    ProblemParams("P3", 1, 2),
    ProblemParams("P3", 2, 8),
    ProblemParams("P3", 3, 20),
    ProblemParams("P4", 1, 4, L=2),
    ProblemParams("P4", 2, 8, L=4),
    ProblemParams("P4", 10, 100, L=5),
    ProblemParams("P5", 1, 3),
    ProblemParams("P5", 2, 6),
    ProblemParams("P5", 10, 50),
]


@pytest.mark.parametrize("params", INSTANCES, ids=lambda p: f"{p.family}-n{p.n}-m{p.m}")
def test_matches_literal_formula(params):
    prob = make_problem(params)
    X = np.random.default_rng(params.m).uniform(-3, 3, (5, params.n))
    vals = prob.values(X, np.arange(params.m))
    for i, x in enumerate(X):
        ref = [literal(params, list(x), s) for s in range(1, params.m + 1)]
        np.testing.assert_allclose(vals[i], ref, rtol=1e-12, atol=1e-12)


def _F0(params):
    return make_problem(params).worst(np.zeros(params.n))


def test_origin_values():
    assert _F0(ProblemParams("P1", 2, 4, K=2)) == 0.0
    np.testing.assert_allclose(make_problem(ProblemParams("P1", 2, 4, K=2)).values(np.zeros((1, 2)), np.arange(4))[0],
                               [0, 0, -6, -6], atol=1e-15)
    assert _F0(ProblemParams("P2", 10, 30, K=10)) == 0.0
    assert _F0(ProblemParams("P3", 1, 2)) == 0.0
    assert _F0(ProblemParams("P3", 10, 100)) == 0.0
    assert _F0(ProblemParams("P4", 10, 100, L=5)) == pytest.approx(0.1875, abs=1e-15)
    assert _F0(ProblemParams("P4", 10, 50, L=10)) == pytest.approx(0.0, abs=1e-14)
    assert _F0(ProblemParams("P5", 10, 51)) == 0.0
    for m in (2, 4, 50):
        assert _F0(ProblemParams("P5", 3, m)) == pytest.approx(-1 / (m - 1) ** 2, abs=1e-15)


def test_p4_origin_formula():
    for m, L in [(20, 2), (30, 5), (100, 5), (60, 6)]:
        K = m // L
        assert _F0(ProblemParams("P4", 4, m, L=L)) == pytest.approx(5 / K - 25 / K**2, abs=1e-14)


def test_p5_omegas():
    np.testing.assert_allclose(p5_omegas(5), [-1, -0.5, 0, 0.5, 1])
    prob = make_problem(ProblemParams("P5", 1, 5))
    assert prob.f([0.0], 2) == 0.0
    assert prob.f([0.0], 0) == -1.0


def test_p2_at_outer_vector():
    params = ProblemParams("P2", 4, 12, K=4)
    prob = make_problem(params)
    for s in range(4, 12):
        wt = 2 * math.pi / 8
        x = np.array([math.cos(wt * (s + 1 - 4)), math.sin(wt * (s + 1 - 4)), 0, 0])
        assert prob.f(x, s) == pytest.approx(-2.0, abs=1e-12)


def test_p3_coefficients_k2():
    _, _, _, at, bt = p3_coefficients(1, 4)
    np.testing.assert_allclose(at, [2.5, 5.0])
    np.testing.assert_allclose(bt, [6.25, 37.5])


@settings(max_examples=100, deadline=None)
@given(
    n=st.integers(2, 5), extra=st.integers(0, 8), K=st.integers(2, 6),
    x=st.lists(st.floats(-5, 5), min_size=5, max_size=5),
)
def test_p1_equals_p2_on_ridge(n, extra, K, x):
    m = K + extra
    p1 = make_problem(ProblemParams("P1", n, m, K=K))
    p2 = make_problem(ProblemParams("P2", n, m, K=K))
    X = np.array(x[:n])[None, :]
    idx = np.arange(K)
    np.testing.assert_array_equal(p1.values(X, idx), p2.values(X, idx))


SUPPORT_CASES = [
    ProblemParams("P1", 2, 8, K=3),
    ProblemParams("P1", 3, 20, K=6),
    ProblemParams("P2", 2, 10, K=4),
    ProblemParams("P2", 3, 20, K=2),
    ProblemParams("P3", 1, 4),
    ProblemParams("P3", 2, 8),
    ProblemParams("P3", 3, 20),
    ProblemParams("P4", 2, 8, L=4),
    ProblemParams("P4", 3, 20, L=5),
    ProblemParams("P5", 2, 5),
    ProblemParams("P5", 3, 8),
]


@pytest.mark.parametrize("params", SUPPORT_CASES, ids=lambda p: f"{p.family}-n{p.n}-m{p.m}")
def test_support_at_optimum(params):
    prob = make_problem(params)
    rng = np.random.default_rng(0)
    for r in (1e-2, 1e-4):
        found = support_oracle(prob, ball_sampler(np.zeros(params.n), r, rng), 3000, FCallCounter())
        assert found == set(prob.claimed_support)


@pytest.mark.parametrize(
    "params",
    [
        ProblemParams("P1", 1, 4, K=2),
        ProblemParams("P1", 2, 4, K=5),
        ProblemParams("P2", 2, 4, K=1),
        ProblemParams("P3", 2, 3),
        ProblemParams("P4", 2, 9, L=2),
        ProblemParams("P4", 2, 8, L=None),
        ProblemParams("P5", 1, 1),
        ProblemParams("P9", 1, 4),
    ],
)
def test_invalid_params(params):
    with pytest.raises(ValueError):
        make_problem(params)


def test_index_out_of_range():
    prob = make_problem(ProblemParams("P5", 1, 3))
    with pytest.raises((IndexError, ValueError)):
        prob.f([0.0], 3)
