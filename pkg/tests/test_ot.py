import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linear_sum_assignment

from rankcpd.errors import (
    ConvergenceWarning,
    CountMismatchError,
    DimensionMismatchError,
    InvalidArgumentError,
    NonFiniteError,
    SolverError,
)
from rankcpd.halton import generate_halton
from rankcpd.ot import cost_matrix, marginal_violation, row_normalize, solve_exact, solve_sinkhorn


def brute_force(cost):
    n = cost.shape[0]
    best = min(itertools.permutations(range(n)), key=lambda p: cost[np.arange(n), p].sum())
    return cost[np.arange(n), best].sum() / n


# cost matrix

def test_cost_examples():
    np.testing.assert_array_equal(cost_matrix([[0.0]], [[1.0]]), [[1.0]])
    np.testing.assert_array_equal(
        cost_matrix([[0, 0], [1, 1]], [[0, 0], [1, 0]]), [[0.0, 1.0], [2.0, 1.0]]
    )


def test_cost_accepts_grid_and_normalises():
    grid = generate_halton(4, 2)
    src = np.arange(8.0).reshape(4, 2)
    raw = cost_matrix(src, grid)
    np.testing.assert_allclose(cost_matrix(src, grid, normalize=True), raw / raw.max())


def test_cost_errors():
    with pytest.raises(DimensionMismatchError):
        cost_matrix(np.zeros((2, 2)), np.zeros((2, 3)))
    with pytest.raises(CountMismatchError):
        cost_matrix(np.zeros((2, 2)), np.zeros((3, 2)))


# exact

def test_exact_examples():
    plan = solve_exact(np.array([[0.0, 1.0], [1.0, 0.0]]))
    np.testing.assert_array_equal(plan.coupling, [[0.5, 0.0], [0.0, 0.5]])
    plan = solve_exact(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert plan.assignment.tolist() == [1, 0]
    assert plan.transport_cost(np.array([[1.0, 0.0], [0.0, 1.0]])) == 0.0


def test_exact_six_by_six_brute_force(rng):
    for _ in range(5):
        cost = rng.random((6, 6))
        assert math.isclose(solve_exact(cost).transport_cost(cost), brute_force(cost),
                            rel_tol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(0, 100, allow_nan=False))))
def test_exact_matches_brute_force(cost):
    plan = solve_exact(cost)
    n = cost.shape[0]
    assert sorted(plan.assignment.tolist()) == list(range(n))
    assert np.all((plan.coupling == 0) | (plan.coupling == 1.0 / n))
    assert plan.transport_cost(cost) <= brute_force(cost) + 1e-9


def test_exact_matches_scipy(rng):
    for n in (20, 100, 300):
        cost = rng.random((n, n))
        r, c = linear_sum_assignment(cost)
        ref = cost[r, c].sum() / n
        assert math.isclose(solve_exact(cost).transport_cost(cost), ref, rel_tol=1e-12)


@pytest.mark.parametrize("bad", [np.zeros((2, 3)), np.zeros((0, 0)), np.array([[np.nan]])])
def test_exact_rejects_bad_costs(bad):
    with pytest.raises((InvalidArgumentError, NonFiniteError)):
        solve_exact(bad)


# entropic

def test_sinkhorn_uniform_cost_gives_product_plan():
    plan = solve_sinkhorn(np.full((5, 5), 3.0), 0.5)
    np.testing.assert_allclose(plan.coupling, 1 / 25, atol=1e-12)


def test_sinkhorn_huge_epsilon_is_independent():
    plan = solve_sinkhorn(np.array([[0.0, 1.0], [1.0, 0.0]]), 1e6)
    np.testing.assert_allclose(plan.coupling, 0.25, atol=1e-6)


@pytest.mark.parametrize("eps", [0.01, 0.1, 0.5, 1.0, 10.0])
def test_sinkhorn_two_by_two_closed_form(eps):
    cost = np.array([[0.0, 1.0], [1.0, 0.0]])
    p = 1.0 / (2.0 * (1.0 + math.exp(-1.0 / eps)))
    plan = solve_sinkhorn(cost, eps, tolerance=1e-12)
    np.testing.assert_allclose(plan.coupling, [[p, 0.5 - p], [0.5 - p, p]], atol=1e-9)


def test_sinkhorn_small_epsilon_near_permutation():
    plan = solve_sinkhorn(np.array([[0.0, 1.0], [1.0, 0.0]]), 0.01)
    assert abs(plan.coupling[0, 0] - 0.5) <= 1e-3


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1),
       st.sampled_from([0.01, 0.1, 1.0, 10.0]))
def test_sinkhorn_feasible(n, seed, eps):
    cost = np.random.default_rng(seed).random((n, n))
    plan = solve_sinkhorn(cost, eps, tolerance=1e-9)
    assert plan.converged
    assert np.all(plan.coupling >= 0)
    assert marginal_violation(plan.coupling) <= 1e-9
    assert abs(plan.coupling.sum() - 1.0) <= 1e-8


def test_transport_cost_monotone_in_epsilon(rng):
    cost = rng.random((20, 20))
    exact = solve_exact(cost).transport_cost(cost)
    costs = [solve_sinkhorn(cost, e).transport_cost(cost) for e in (0.01, 0.1, 1.0, 10.0)]
    assert exact <= costs[0] + 1e-9
    assert all(a <= b + 1e-9 for a, b in zip(costs, costs[1:]))


def test_small_epsilon_gap_to_exact(rng):
    for _ in range(5):
        cost = rng.random((32, 32))
        exact = solve_exact(cost).transport_cost(cost)
        soft = solve_sinkhorn(cost, 1e-3).transport_cost(cost)
        assert (soft - exact) / exact <= 1e-2


def test_sinkhorn_budget_exhaustion_warns(rng):
    cost = rng.random((30, 30))
    with pytest.warns(ConvergenceWarning):
        plan = solve_sinkhorn(cost, 1e-3, max_iters=3, tolerance=1e-14)
    assert not plan.converged
    assert plan.iterations <= 3


def test_sinkhorn_no_warning_when_converged(rng):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_sinkhorn(rng.random((10, 10)), 0.1)


@pytest.mark.parametrize("kwargs", [{"epsilon": 0.0}, {"epsilon": -1.0},
                                    {"epsilon": math.inf}, {"epsilon": 1.0, "max_iters": 0},
                                    {"epsilon": 1.0, "tolerance": 0.0}])
def test_sinkhorn_argument_errors(kwargs):
    with pytest.raises(InvalidArgumentError):
        solve_sinkhorn(np.eye(3), **kwargs)


def test_row_normalize():
    out = row_normalize(np.array([[0.1, 0.3], [0.25, 0.25]]))
    np.testing.assert_allclose(out, [[0.25, 0.75], [0.5, 0.5]])
    with pytest.raises(SolverError):
        row_normalize(np.array([[0.0, 0.0], [0.5, 0.5]]))
