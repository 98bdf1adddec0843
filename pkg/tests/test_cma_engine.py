import copy
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from as3cma import cma_engine as cma
from as3cma.cma_engine import Outcome, RestartPolicy, Thresholds


def sphere(X):
    return np.sum(np.atleast_2d(X) ** 2, axis=1)


@pytest.mark.parametrize("n, expected", [(1, 4), (10, 10), (6, 9), (2, 6), (100, 17)])
def test_default_lambda(n, expected):
    assert cma.default_lambda(n) == expected
    assert expected == math.floor(4 + 3 * math.log(n))


def test_default_lambda_rejects_zero():
    with pytest.raises(ValueError):
        cma.default_lambda(0)


@pytest.mark.parametrize("lam", [4, 5, 9, 10, 17, 40])
def test_recombination_weights(lam):
    w = cma.recombination_weights(lam)
    mu = lam // 2
    assert w.shape == (lam,)
    assert np.all(np.diff(w) <= 0)
    assert np.all(w[:mu] > 0) and np.all(w[mu:] == 0)
    assert w[:mu].sum() == pytest.approx(1.0, abs=1e-15)


def test_init_defaults():
    st_ = cma.init(10, np.zeros(10), 2.0)
    assert st_.lambda_x == 10
    assert st_.iteration == 0
    assert np.array_equal(st_.path_sigma, np.zeros(10))
    assert np.array_equal(st_.path_cov, np.zeros(10))
    np.testing.assert_array_equal(st_.covariance, 4 * np.eye(10))


def test_init_well_placement_state():
    st_ = cma.init(6, np.full(6, 25.0), 12.5)
    assert st_.lambda_x == 9
    np.testing.assert_allclose(st_.covariance, 12.5**2 * np.eye(6))


def test_init_rejects_non_spd():
    with pytest.raises(ValueError):
        cma.init(2, [0, 0], 1.0, np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        cma.init(2, [0, 0], 0.0)


def test_ask_degenerate_sigma():
    st_ = cma.init(3, [1.0, -2.0, 0.5], 1e-300)
    X = cma.ask(st_, np.random.default_rng(0))
    np.testing.assert_allclose(X, np.tile(st_.mean, (st_.lambda_x, 1)))


def test_ask_reproducible():
    st_ = cma.init(1, [0.0], 1.0, lambda_x=2)
    a = cma.ask(st_, np.random.default_rng(42))
    b = cma.ask(st_, np.random.default_rng(42))
    assert a.shape == (2, 1)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(a[:, 0], np.random.default_rng(42).standard_normal((2, 1))[:, 0])


def test_ask_empirical_mean():
    st_ = cma.init(2, [0.3, -0.7], 1.0, lambda_x=100_000)
    X = cma.ask(st_, np.random.default_rng(1))
    assert np.all(np.abs(X.mean(axis=0) - st_.mean) < 5e-2)


def test_ask_uses_shape_matrix():
    C = np.array([[4.0, 1.0], [1.0, 2.0]])
    st_ = cma.init(2, [0, 0], 0.5, C, lambda_x=200_000)
    X = cma.ask(st_, np.random.default_rng(3))
    np.testing.assert_allclose(np.cov(X.T), 0.25 * C, atol=0.02)


def test_tell_identical_candidates_keep_mean():
    st_ = cma.init(4, np.arange(4.0), 1.0)
    X = np.tile(st_.mean, (st_.lambda_x, 1))
    new = cma.tell(st_, X, np.zeros(st_.lambda_x))
    np.testing.assert_allclose(new.mean, st_.mean)
    assert new.iteration == 1


def test_tell_rejects_bad_input():
    st_ = cma.init(3, np.zeros(3), 1.0)
    X = cma.ask(st_, np.random.default_rng(0))
    with pytest.raises(ValueError):
        cma.tell(st_, X[:-1], np.zeros(st_.lambda_x - 1))
    f = sphere(X)
    f[2] = np.nan
    with pytest.raises(ValueError):
        cma.tell(st_, X, f)


def test_tell_does_not_mutate_input():
    st_ = cma.init(3, np.zeros(3), 1.0)
    X = cma.ask(st_, np.random.default_rng(0))
    before = copy.deepcopy(st_)
    cma.tell(st_, X, sphere(X))
    np.testing.assert_array_equal(st_.mean, before.mean)
    np.testing.assert_array_equal(st_.shape, before.shape)
    assert st_.step_size == before.step_size


def _trajectory(transform, seed=5, n=4, iters=30):
    rng = np.random.default_rng(seed)
    st_ = cma.init(n, np.full(n, 2.0), 1.0)
    for _ in range(iters):
        X = cma.ask(st_, rng)
        st_ = cma.tell(st_, X, transform(sphere(X - 0.5)))
    return st_


@pytest.mark.parametrize(
    "g", [lambda f: 3 * f + 7, lambda f: np.exp(f / 50), lambda f: np.sqrt(f), lambda f: f**3 - 1e3]
)
def test_rank_invariance(g):
    a = _trajectory(lambda f: f)
    b = _trajectory(g)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.shape, b.shape)
    assert a.step_size == b.step_size


def test_determinism():
    a = _trajectory(lambda f: f, seed=9)
    b = _trajectory(lambda f: f, seed=9)
    np.testing.assert_array_equal(a.mean, b.mean)
    np.testing.assert_array_equal(a.shape, b.shape)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 6))
def test_shape_stays_spd(seed, n):
    rng = np.random.default_rng(seed)
    st_ = cma.init(n, rng.uniform(-4, 4, n), 2.0)
    for _ in range(40):
        X = cma.ask(st_, rng)
        st_ = cma.tell(st_, X, sphere(X) + rng.random(len(X)))
        np.linalg.cholesky(st_.shape)
        assert st_.step_size > 0
        np.testing.assert_allclose(st_.shape, st_.shape.T)


@pytest.mark.parametrize("n", [2, 10])
def test_sphere_convergence(n):
    for seed in range(20):
        rng = np.random.default_rng(seed)
        st_ = cma.init(n, rng.uniform(-4, 4, n), 2.0)
        fcalls = 0
        while sphere(st_.mean)[0] >= 1e-12:
            X = cma.ask(st_, rng)
            st_ = cma.tell(st_, X, sphere(X))
            fcalls += st_.lambda_x
            assert fcalls < 1_000_000
        assert st_.iteration < 10_000


def _state(sigma=0.5, shape=None):
    st_ = cma.init(2, [0, 0], sigma, shape)
    return st_


def test_check_termination_success():
    s = cma.check_termination(_state(0.5), 1e-13, 100, 1_000_000)
    assert s.outcome is Outcome.SUCCESS


def test_check_termination_sigma():
    s = cma.check_termination(_state(1e-13), 1.0, 100, 1_000_000)
    assert s.outcome is Outcome.FAIL_SIGMA


def test_check_termination_condition():
    s = cma.check_termination(_state(1.0, np.diag([1.0, 1e15])), 1.0, 100, 1_000_000)
    assert s.outcome is Outcome.FAIL_CONDITION


def test_check_termination_order():
    st_ = _state(1e-13, np.diag([1.0, 1e15]))
    assert cma.check_termination(st_, 1.0, 10**6, 10**6).outcome is Outcome.FAIL_BUDGET
    assert cma.check_termination(st_, 1.0, 10, 10**6).outcome is Outcome.FAIL_SIGMA
    assert cma.check_termination(_state(1.0), None, 10, 10**6).running
    assert cma.check_termination(_state(1.0), 1e-13, 10, 10**6, Thresholds(gap=1e-14)).running


def test_coordinate_std_termination():
    assert cma.coordinate_std_termination(_state(1e-5)) is True
    assert cma.coordinate_std_termination(_state(1.0)) is False
    assert cma.coordinate_std_termination(_state(1e-3, np.diag([1e-4, 1e-1]))) is False


def test_restart_policies():
    rng = np.random.default_rng(0)
    st_ = cma.init(10, np.zeros(10), 0.001)
    box = (np.full(10, -4.0), np.full(10, 4.0))
    d = cma.restart(st_, RestartPolicy.DOUBLE_LAMBDA, box, 2.0, rng)
    assert d.lambda_x == 20
    s = cma.restart(st_, RestartPolicy.SIMPLE, box, 2.0, rng)
    assert s.lambda_x == 10
    assert s.step_size == 2.0 and np.array_equal(s.shape, np.eye(10))
    assert np.array_equal(s.path_sigma, np.zeros(10)) and s.iteration == 0


def test_restart_mean_in_box():
    rng = np.random.default_rng(1)
    st_ = cma.init(6, np.full(6, 25.0), 12.5)
    box = (np.ones(6), np.full(6, 50.0))
    for _ in range(200):
        r = cma.restart(st_, RestartPolicy.SIMPLE, box, 12.5, rng)
        assert np.all(r.mean >= 1) and np.all(r.mean <= 50)
