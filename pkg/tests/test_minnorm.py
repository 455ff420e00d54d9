import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from modo.checks import closed_form_two, grid_min_norm_value
from modo.core import ConvergenceError, is_simplex_point
from modo.minnorm import (ca_distance, default_max_iters, ps_measure, solve_min_norm,
                          solve_min_norm_regularized)
from modo.simplex import uniform_weights, vertex

entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(1, 6), st.integers(1, 4)).flatmap(
    lambda s: arrays(np.float64, s, elements=entries))


def test_single_objective():
    g = np.array([[3.0], [4.0]])
    sol = solve_min_norm(g)
    np.testing.assert_array_equal(sol.weights, [1.0])
    assert sol.ps_value == pytest.approx(5.0)


def test_opposite_gradients():
    g = np.array([1.0, -2.0, 0.5])
    sol = solve_min_norm(np.column_stack([g, -g]))
    np.testing.assert_allclose(sol.weights, [0.5, 0.5], atol=1e-9)
    assert sol.ps_value <= 1e-9


def test_two_objectives_closed_form(rng):
    for _ in range(20):
        G = rng.standard_normal((3, 2))
        assert solve_min_norm(G).ps_value == pytest.approx(closed_form_two(G), abs=1e-6)


def test_three_objectives_grid_oracle():
    G = np.random.default_rng(1).standard_normal((5, 3))
    assert solve_min_norm(G).ps_value == pytest.approx(grid_min_norm_value(G), abs=1e-5)


def test_identical_columns():
    g = np.array([1.0, 2.0])
    assert ps_measure(np.column_stack([g, g, g])) == pytest.approx(np.linalg.norm(g))


def test_zero_matrix_regularized_is_uniform():
    for rho in (1e-3, 1.0, 10.0):
        np.testing.assert_allclose(solve_min_norm_regularized(np.zeros((4, 3)), rho).weights,
                                   uniform_weights(3), atol=1e-12)


def test_large_rho_near_uniform(rng):
    G = rng.standard_normal((5, 4))
    rho = 1e6 * np.linalg.norm(G.T @ G, 2)
    np.testing.assert_allclose(solve_min_norm_regularized(G, rho).weights, uniform_weights(4), atol=1e-3)


def test_regularized_needs_positive_rho():
    with pytest.raises(ValueError):
        solve_min_norm_regularized(np.ones((2, 2)), 0.0)


def test_ca_distance_zero_at_optimum(rng):
    G = rng.standard_normal((6, 3))
    sol = solve_min_norm(G)
    assert ca_distance(G, sol.weights) <= 1e-10
    assert ca_distance(rng.standard_normal((4, 1)), [1.0]) == 0.0


def test_ca_distance_formula(rng):
    G = rng.standard_normal((4, 3))
    lam = np.array([0.2, 0.3, 0.5])
    sol = solve_min_norm(G)
    assert ca_distance(G, lam) == pytest.approx(np.sum((G @ lam - G @ sol.weights) ** 2))


def test_no_convergence_carries_best():
    G = np.random.default_rng(3).standard_normal((20, 3)) * np.array([1.0, 1e-3, 1e2])
    with pytest.raises(ConvergenceError, match="no convergence") as info:
        solve_min_norm(G, tol=1e-300, max_iters=1)
    assert is_simplex_point(info.value.best.weights)


def test_bad_inputs():
    with pytest.raises(ValueError):
        solve_min_norm(np.ones(3))
    with pytest.raises(ValueError):
        solve_min_norm(np.ones((2, 2)), tol=0.0)
    assert default_max_iters(np.eye(2)) == 200


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_weights_feasible_and_optimal(G):
    sol = solve_min_norm(G)
    assert is_simplex_point(sol.weights)
    np.testing.assert_allclose(sol.direction, -G @ sol.weights)
    # no vertex does better
    for m in range(G.shape[1]):
        assert sol.ps_value <= np.linalg.norm(G[:, m]) + 1e-7 * (1 + np.abs(G).max())


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_inner_product_property(G):
    # <G lam*, G lam> >= |G lam*|^2 for every lam in the simplex
    sol = solve_min_norm(G)
    Gl = G @ sol.weights
    scale = 1e-8 * (1 + np.abs(G).max() ** 2)
    for m in range(G.shape[1]):
        assert Gl @ G[:, m] >= Gl @ Gl - scale


@settings(max_examples=100, deadline=None)
@given(matrices, st.sampled_from([1e-3, 1e-1, 1.0]))
def test_regularization_sandwich(G, rho):
    M = G.shape[1]
    base = solve_min_norm(G).ps_value ** 2
    reg = solve_min_norm_regularized(G, rho).ps_value ** 2
    scale = 1e-8 * (1 + np.abs(G).max() ** 2)
    assert base - scale <= reg <= base + rho * (1 - 1 / M) + scale


@settings(max_examples=100, deadline=None)
@given(matrices)
def test_column_permutation_invariant(G):
    perm = np.arange(G.shape[1])[::-1]
    assert ps_measure(G[:, perm]) == pytest.approx(ps_measure(G), abs=1e-7 * (1 + np.abs(G).max()))


def test_warm_start_from_vertex(rng):
    G = rng.standard_normal((5, 3))
    a = solve_min_norm(G)
    b = solve_min_norm(G, init=vertex(3, 0))
    assert a.ps_value == pytest.approx(b.ps_value, abs=1e-8)
