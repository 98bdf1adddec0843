import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from as3cma import cma_engine as cma
from as3cma.as3 import ScenarioSubset, chi2_quantile, mahalanobis_sq
from as3cma.problems import ProblemParams, make_problem
from as3cma.worstcase import (
    FCallCounter,
    NonFiniteValueError,
    UndefinedCorrelation,
    WorstCaseProblem,
    ball_sampler,
    ellipsoid_sampler,
    evaluate_batch,
    evaluate_full,
    evaluate_subset,
    kendall_tau,
    subset_support_ratios,
    support_oracle,
)


def brute_tau(a, b):
    conc = disc = ta = tb = 0
    for i, j in itertools.combinations(range(len(a)), 2):
        da = a[i] - a[j]
        db = b[i] - b[j]
        if da == 0 and db == 0:
            continue
        if da == 0:
            ta += 1
        elif db == 0:
            tb += 1
        elif da * db > 0:
            conc += 1
        else:
            disc += 1
    return (conc - disc) / np.sqrt((conc + disc + ta) * (conc + disc + tb))


def test_evaluate_subset_p5():
    p5 = make_problem(ProblemParams("P5", 1, 3))
    c = FCallCounter()
    rec = evaluate_subset(p5, [0.0], ScenarioSubset(np.array([0, 1, 2])), c)
    np.testing.assert_array_equal(rec.values, [-1.0, 0.0, -1.0])
    assert rec.worst_value == 0.0
    assert rec.supporting == {1}
    assert c.total == 3


def test_evaluate_singleton_and_counter():
    p = make_problem(ProblemParams("P2", 3, 8, K=3))
    c = FCallCounter(total=7)
    x = np.array([0.2, -0.1, 0.4])
    rec = evaluate_subset(p, x, ScenarioSubset(np.array([4])), c)
    assert rec.worst_value == p.f(x, 4)
    assert rec.supporting == {4}
    assert c.total == 8
    evaluate_subset(p, x, ScenarioSubset(np.array([0, 1, 2, 5, 7])), c)
    assert c.total == 13


def test_evaluate_full_p2_origin():
    p2 = make_problem(ProblemParams("P2", 10, 30, K=10))
    rec = evaluate_full(p2, np.zeros(10), FCallCounter())
    assert rec.worst_value == 0.0
    assert rec.supporting == set(range(10))
    np.testing.assert_array_equal(rec.values[10:], -1.0)


def test_single_scenario_reduces_to_objective():
    prob = WorstCaseProblem(2, 1, lambda X, idx: np.sum(X**2, axis=1, keepdims=True))
    rec = evaluate_full(prob, [3.0, 4.0], FCallCounter())
    assert rec.worst_value == 25.0


def test_nonfinite_value_reports_point():
    prob = WorstCaseProblem(1, 2, lambda X, idx: np.where(idx == 1, np.nan, 0.0) + 0 * X)
    with pytest.raises(NonFiniteValueError) as err:
        evaluate_full(prob, [0.5], FCallCounter())
    assert err.value.s == 1


def test_subset_monotone_and_conservation():
    rng = np.random.default_rng(0)
    p = make_problem(ProblemParams("P1", 3, 12, K=4))
    c = FCallCounter()
    expected = 0
    for _ in range(1000):
        x = rng.uniform(-3, 3, 3)
        B = np.sort(rng.choice(12, rng.integers(1, 13), replace=False))
        A = np.sort(rng.choice(B, rng.integers(1, B.size + 1), replace=False))
        fa = evaluate_subset(p, x, ScenarioSubset(A), c).worst_value
        fb = evaluate_subset(p, x, ScenarioSubset(B), c).worst_value
        full = p.worst(x)
        assert fa <= fb <= full
        expected += A.size + B.size
    assert c.total == expected


def test_evaluate_batch_support_flags():
    p = make_problem(ProblemParams("P4", 2, 8, L=4))
    X = np.random.default_rng(1).standard_normal((6, 2))
    sub = ScenarioSubset(np.array([1, 3, 4, 6]))
    c = FCallCounter()
    vals, worst, support = evaluate_batch(p, X, sub, c)
    assert c.total == 24
    assert vals.shape == (6, 4)
    np.testing.assert_array_equal(worst, vals.max(axis=1))
    assert np.all(support.sum(axis=1) >= 1)


@pytest.mark.parametrize(
    "a, b, expected",
    [((1, 2, 3, 4), (1, 2, 3, 4), 1.0), ((1, 2, 3, 4), (4, 3, 2, 1), -1.0), ((1, 2, 3, 4), (1, 3, 2, 4), 2 / 3)],
)
def test_kendall_examples(a, b, expected):
    assert kendall_tau(a, b) == pytest.approx(expected, abs=1e-15)


def test_kendall_undefined():
    with pytest.raises(UndefinedCorrelation):
        kendall_tau([1, 1, 1], [1, 2, 3])
    with pytest.raises(ValueError):
        kendall_tau([1], [1])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), min_size=2, max_size=25))
def test_kendall_matches_brute_force_with_ties(pairs):
    a = np.array([p[0] for p in pairs], float)
    b = np.array([p[1] for p in pairs], float)
    if np.all(a == a[0]) or np.all(b == b[0]):
        with pytest.raises(UndefinedCorrelation):
            kendall_tau(a, b)
        return
    assert kendall_tau(a, b) == pytest.approx(brute_tau(a, b), abs=1e-12)
    assert kendall_tau(a, b) == pytest.approx(kendall_tau(b, a), abs=1e-15)


def test_support_oracle_single_point():
    p = make_problem(ProblemParams("P5", 1, 4))
    assert support_oracle(p, [np.zeros(1)], 1) == {1, 2}


def test_support_oracle_monotone():
    p = make_problem(ProblemParams("P1", 2, 10, K=4))
    pts = np.random.default_rng(0).uniform(-2, 2, (300, 2))
    small = support_oracle(p, list(pts[:100]), 100)
    large = support_oracle(p, list(pts), 300)
    assert small <= large


def test_support_oracle_p2_origin():
    p = make_problem(ProblemParams("P2", 10, 30, K=10))
    c = FCallCounter()
    found = support_oracle(p, ball_sampler(np.zeros(10), 1e-3, np.random.default_rng(0)), 1000, c)
    assert found == set(range(10))
    assert c.total == 30 * 1000


@pytest.mark.parametrize("m", [3, 5, 9])
def test_support_oracle_p5_shrinking(m):
    p = make_problem(ProblemParams("P5", 1, m))
    rng = np.random.default_rng(m)
    for r in (1e-2, 1e-4):
        assert support_oracle(p, ball_sampler(np.zeros(1), r, rng), 500) == {(m - 1) // 2}


def test_ellipsoid_sampler_inside():
    rng = np.random.default_rng(0)
    st_ = cma.init(3, [1.0, 2.0, 3.0], 0.5, np.diag([1.0, 2.0, 3.0]))
    q = chi2_quantile(3, 0.99)
    X = ellipsoid_sampler(st_.mean, st_.covariance, q, rng)(2000)
    assert np.all(mahalanobis_sq(X, st_) <= q + 1e-9)


def test_support_ratios():
    assert subset_support_ratios(range(10), range(10)) == (1.0, 0.0)
    assert subset_support_ratios(range(30), range(10)) == (1.0, 2.0)
    assert subset_support_ratios([20, 21], range(10)) == (0.0, 0.2)
    with pytest.raises(ValueError):
        subset_support_ratios([1], [])
