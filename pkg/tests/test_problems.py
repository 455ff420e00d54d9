import math

import numpy as np
import pytest

from modo.core import finite_difference_gradient_check
from modo.problems import (LOWER_BOUND_B, LowerBoundSpec, QuadraticProblem, ScQuadraticSpec, ToyProblem,
                           ToySpec, make_lower_bound_example, make_sc_quadratic, make_toy_nonconvex,
                           sc_test_set, toy_test_set)


def test_sc_default_coefficients(sc_default):
    problem, S = sc_default
    np.testing.assert_array_equal(problem.b1, [1.0, 2.0, 1.0])
    np.testing.assert_array_equal(problem.b2, [1.0, 3.0, 2.0])
    assert S.n == 50 and problem.d == 10 and problem.M == 3


def test_sc_matrix_spectrum(sc_default):
    problem, _ = sc_default
    eig = np.linalg.eigvalsh(problem.A)
    assert eig[0] >= 0.5 - 1e-9 and eig[-1] <= 5.0 + 1e-9
    np.testing.assert_allclose(problem.A, problem.A.T, atol=1e-12)


def test_sc_gradient_formula(sc_default, rng):
    problem, S = sc_default
    x = rng.standard_normal(10)
    G = problem.per_sample_gradient_matrix(x, S[3])
    for m in range(3):
        np.testing.assert_allclose(G[:, m], problem.b1[m] * problem.A @ x - problem.b2[m] * S[3])


def test_sc_empirical_is_sample_average(sc_default, rng):
    problem, S = sc_default
    x = rng.standard_normal(10)
    loop = np.mean([problem.per_sample_gradient_matrix(x, z) for z in S.samples], axis=0)
    np.testing.assert_allclose(problem.empirical_gradient_matrix(x, S), loop, atol=1e-12)


def test_sc_weighted_minimizer_is_stationary(sc_default):
    problem, S = sc_default
    for lam in ([1 / 3] * 3, [0.7, 0.2, 0.1], [0.0, 0.0, 1.0]):
        lam = np.array(lam)
        x = problem.scalarized_minimizer(lam, S.mean())
        assert np.linalg.norm(problem.empirical_gradient_matrix(x, S) @ lam) <= 1e-9


def test_sc_noiseless_empirical_equals_population(rng):
    problem, S = make_sc_quadratic(ScQuadraticSpec(z_std=0.0))
    for _ in range(5):
        x = rng.standard_normal(10) * 3
        np.testing.assert_allclose(problem.empirical_gradient_matrix(x, S),
                                   problem.population_gradient_matrix(x), atol=1e-12)


def test_sc_constants(sc_default):
    problem, S = sc_default
    c = problem.constants(S, np.zeros(10))
    eig = np.linalg.eigvalsh(problem.A)
    assert c.strong_convexity == pytest.approx(eig[0])
    assert c.lip_grad == pytest.approx(2 * eig[-1])
    assert c.lip_val_frob == pytest.approx(math.sqrt(3) * c.lip_val)
    assert problem.constants() is None


def test_sc_scalarized_strong_convexity(sc_default, rng):
    # Hessian of F_S lam is (b1.lam) A
    problem, S = sc_default
    lam = np.array([0.2, 0.3, 0.5])
    x, y = rng.standard_normal(10), rng.standard_normal(10)
    gx = problem.empirical_gradient_matrix(x, S) @ lam
    gy = problem.empirical_gradient_matrix(y, S) @ lam
    assert (gx - gy) @ (x - y) >= (problem.b1 @ lam) * problem.eig_min * np.sum((x - y) ** 2) - 1e-9


def test_sc_initial_gap_closed_form(sc_default):
    problem, S = sc_default
    lam = np.array([0.2, 0.3, 0.5])
    x_star = problem.scalarized_minimizer(lam, S.mean())
    assert problem.initial_gap(x_star, lam, S) == pytest.approx(0.0, abs=1e-12)
    x0 = np.ones(10)
    direct = (problem.empirical_values(x0, S) - problem.empirical_values(x_star, S)) @ lam
    assert problem.initial_gap(x0, lam, S) == pytest.approx(direct)


def test_sc_rejects_bad_specs():
    with pytest.raises(ValueError, match="A not positive definite"):
        QuadraticProblem(-np.eye(2), [1.0], [1.0])
    with pytest.raises(ValueError):
        QuadraticProblem(np.eye(2), [0.0], [1.0])
    with pytest.raises(ValueError):
        QuadraticProblem([[1.0, 0.5], [0.0, 1.0]], [1.0], [1.0])
    with pytest.raises(ValueError):
        ScQuadraticSpec(M=2)


def test_sc_user_matrix():
    A = ((2.0, 0.0), (0.0, 1.0))
    problem, S = make_sc_quadratic(ScQuadraticSpec(d=2, A=A, n=5))
    np.testing.assert_array_equal(problem.A, A)
    with pytest.raises(ValueError, match="A not positive definite"):
        make_sc_quadratic(ScQuadraticSpec(d=2, A=((1.0, 0.0), (0.0, -1.0))))


def test_sc_deterministic_and_nested():
    _, S_a = make_sc_quadratic(ScQuadraticSpec(n=20))
    _, S_b = make_sc_quadratic(ScQuadraticSpec(n=20))
    _, S_c = make_sc_quadratic(ScQuadraticSpec(n=40))
    np.testing.assert_array_equal(S_a.samples, S_b.samples)
    np.testing.assert_array_equal(S_c.samples[:20], S_a.samples)
    test = sc_test_set(ScQuadraticSpec(), 30)
    assert test.n == 30 and not np.array_equal(test.samples[:20], S_a.samples)


def test_toy_gates_vanish_on_axis():
    toy, S = make_toy_nonconvex(ToySpec())
    for x1 in (-5.0, 0.0, 3.0):
        for z in S.samples[:3]:
            np.testing.assert_array_equal(toy.per_sample_values([x1, 0.0], z), [0.0, 0.0])


def test_toy_population_minimum_of_second_quadratic():
    # x2 < 0 keeps only the quadratic half; at x2=-1 gate c2 = tanh(0.5)
    toy = ToyProblem()
    v = toy.population_values([-3.5, -1.0])
    assert v[1] == pytest.approx(math.tanh(0.5) * -20.0)


def test_toy_deterministic():
    _, a = make_toy_nonconvex(ToySpec(n=20, data_seed=3))
    _, b = make_toy_nonconvex(ToySpec(n=20, data_seed=3))
    np.testing.assert_array_equal(a.samples, b.samples)
    assert toy_test_set(ToySpec(), 10).n == 10


def test_toy_finite_differences(rng):
    toy, S = make_toy_nonconvex(ToySpec())
    checked = 0
    while checked < 50:
        x = rng.uniform(-10, 10, 2)
        if ToyProblem.near_kink(x):
            continue
        assert finite_difference_gradient_check(toy, x, S[checked % S.n], 1e-6) <= 1e-4
        checked += 1


def test_toy_clamp_uses_zero_derivative():
    toy = ToyProblem()
    # a2 = 0.5 (-x1 + 3) + tanh(x2) + 2 = 0 on the upper half at x2 = atanh(0.5)
    x2 = math.atanh(0.5)
    x1 = 2 * (2.5) + 3.0
    G = toy.per_sample_gradient_matrix([x1, x2], [0.0, 0.0])
    half = math.tanh(0.5 * x2)
    # only the gate derivative survives for objective 2
    h2 = math.log(5e-6) + 6.0
    np.testing.assert_allclose(G[:, 1], [0.0, h2 * 0.5 * (1 - half ** 2)], atol=1e-9)


def test_toy_population_matches_monte_carlo():
    toy = ToyProblem()
    x = np.array([1.5, -2.0])
    rng = np.random.default_rng(0)
    small = rng.standard_normal((1000, 2))
    grads = np.array([toy.per_sample_gradient_matrix(x, z) for z in small])
    # gradients are affine in z, so the sample mean of gradients is the gradient at the mean
    np.testing.assert_allclose(grads.mean(axis=0), toy.per_sample_gradient_matrix(x, small.mean(axis=0)),
                               atol=1e-10)
    big = rng.standard_normal((1_000_000, 2))
    mc = toy.per_sample_gradient_matrix(x, big.mean(axis=0))
    se = grads.std(axis=0, ddof=1) / math.sqrt(big.shape[0])
    assert np.all(np.abs(mc - toy.population_gradient_matrix(x)) <= 3 * se + 1e-15)


def test_lower_bound_structure():
    spec = LowerBoundSpec(n=64)
    problem, S, Sp, v, j = make_lower_bound_example(spec)
    assert spec.mu == pytest.approx(4.0)
    eig = np.linalg.eigvalsh(problem.A)
    assert eig[0] == pytest.approx(4.0)
    np.testing.assert_allclose(problem.A @ v, 4.0 * v)
    np.testing.assert_allclose(S.mean(), spec.mu * v, atol=1e-12)
    np.testing.assert_allclose(S.mean() - Sp.mean(), v / 64, atol=1e-12)
    np.testing.assert_array_equal(problem.b2, LOWER_BOUND_B)


def test_lower_bound_projected_b():
    b = np.array(LOWER_BOUND_B)
    P = np.eye(2) - 0.5 * np.ones((2, 2))
    np.testing.assert_allclose(P @ b, [-1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_lower_bound_spec_checks():
    with pytest.raises(ValueError):
        LowerBoundSpec(n=4)
    assert LowerBoundSpec(n=27).horizon == 36
    assert LowerBoundSpec(n=27, T=10).horizon == 10


@pytest.mark.parametrize("n", [27, 64, 125])
def test_lower_bound_odd_and_even_sizes(n):
    _, S, _, v, j = make_lower_bound_example(LowerBoundSpec(n=n, j=5))
    assert j == 5
    np.testing.assert_allclose(S.mean(), 16 * n ** (-1 / 3) * v, atol=1e-12)
