import math
from dataclasses import replace

import numpy as np
import pytest

from modo.algorithms import Algo, AlgoConfig, modo_step, run, run_mgda, run_modo, run_static
from modo.core import Dataset, DivergenceError, MolProblem, ZeroProblem
from modo.minnorm import ps_measure
from modo.problems import QuadraticProblem, ScQuadraticSpec, make_sc_quadratic
from modo.rng import index_block
from modo.simplex import uniform_weights, vertex


def cfg(algo, T=100, alpha=0.01, gamma=0.001, seed=0, M=3, d=10, **kw):
    return AlgoConfig(algo, T, alpha, gamma, uniform_weights(M), np.zeros(d), seed, **kw)


class Constant(MolProblem):
    """Every per-sample gradient matrix is the fixed ``G``."""

    def __init__(self, G):
        self.G = np.asarray(G, dtype=float)
        self.d, self.M = self.G.shape
        self.sample_dim = 1

    def per_sample_values(self, x, z):
        return self.G.T @ x

    def per_sample_gradient_matrix(self, x, z):
        return self.G


def test_config_validation():
    with pytest.raises(ValueError):
        cfg("modo", T=-1)
    with pytest.raises(ValueError):
        cfg("modo", alpha=0.0)
    with pytest.raises(ValueError):
        cfg("modo", gamma=-1.0)
    with pytest.raises(ValueError):
        AlgoConfig("modo", 1, 0.1, 0.1, [0.7, 0.7], [0.0])
    with pytest.raises(ValueError):
        cfg("sgd")


def test_step_gamma_zero_is_static_step(sc_default):
    problem, S = sc_default
    x = np.linspace(-1, 1, 10)
    lam = np.array([0.2, 0.5, 0.3])
    x1, lam1 = modo_step(problem, S, x, lam, 0.1, 0.0, (3, 4, 5))
    np.testing.assert_array_equal(lam1, lam)
    np.testing.assert_array_equal(x1, x - 0.1 * (problem.per_sample_gradient_matrix(x, S[5]) @ lam))


def test_step_fixed_point_at_zero_gradients():
    z = ZeroProblem(d=3, M=2)
    S = Dataset(np.zeros((4, 1)))
    x, lam = np.ones(3), np.array([0.3, 0.7])
    x1, lam1 = modo_step(z, S, x, lam, 0.5, 0.5, (0, 1, 2))
    np.testing.assert_array_equal(x1, x)
    np.testing.assert_array_equal(lam1, lam)


def test_step_antisymmetric_hand_instance():
    prob = Constant([[1.0, -1.0]])
    S = Dataset(np.zeros((2, 1)))
    x1, lam1 = modo_step(prob, S, np.array([2.0]), np.array([0.5, 0.5]), 1.0, 0.1, (0, 1, 0))
    np.testing.assert_allclose(lam1, [0.5, 0.5])
    np.testing.assert_allclose(x1, [2.0])


def test_step_order_uses_new_weights():
    # x moves along G3 lam', not G3 lam
    prob = Constant([[1.0, 0.0], [0.0, 2.0]])
    S = Dataset(np.zeros((1, 1)))
    lam = np.array([0.5, 0.5])
    x1, lam1 = modo_step(prob, S, np.zeros(2), lam, 1.0, 0.1, (0, 0, 0))
    assert not np.allclose(lam1, lam)
    np.testing.assert_allclose(x1, -prob.G @ lam1)


def test_horizon_zero(sc_default):
    problem, S = sc_default
    traj = run_modo(problem, S, cfg("modo", T=0))
    assert traj.ts.tolist() == [0]
    np.testing.assert_array_equal(traj.final_x, np.zeros(10))


def test_runs_reproducible(sc_default):
    problem, S = sc_default
    for algo in ("modo", "static", "mgda"):
        a, b = run(problem, S, cfg(algo, T=50)), run(problem, S, cfg(algo, T=50))
        np.testing.assert_array_equal(a.xs, b.xs)
        np.testing.assert_array_equal(a.lams, b.lams)


def test_seed_changes_modo(sc_default):
    problem, S = sc_default
    a = run_modo(problem, S, cfg("modo", T=20, seed=0))
    b = run_modo(problem, S, cfg("modo", T=20, seed=1))
    assert not np.array_equal(a.xs, b.xs)


def test_indices_come_from_stream(sc_default):
    problem, S = sc_default
    traj = run_modo(problem, S, cfg("modo", T=30, seed=9))
    np.testing.assert_array_equal(traj.indices, index_block(9, 30, S.n))
    assert traj.sampled_indices[0] == (0, *index_block(9, 1, S.n)[0])
    st = run_static(problem, S, cfg("static", T=30, seed=9))
    np.testing.assert_array_equal(st.indices[:, 0], index_block(9, 30, S.n)[:, 2])


@pytest.mark.parametrize("seed", range(5))
def test_gamma_zero_matches_static(sc_default, seed):
    problem, S = sc_default
    a = run_modo(problem, S, cfg("modo", T=1000, gamma=0.0, seed=seed))
    b = run_static(problem, S, cfg("static", T=1000, seed=seed))
    np.testing.assert_array_equal(a.xs, b.xs)


def test_record_every(sc_default):
    problem, S = sc_default
    traj = run_modo(problem, S, cfg("modo", T=25, record_every=10))
    assert traj.ts.tolist() == [0, 10, 20, 25]
    full = run_modo(problem, S, cfg("modo", T=25))
    np.testing.assert_array_equal(traj.final_x, full.final_x)


def test_iterates_stay_bounded(sc_default):
    problem, S = sc_default
    c = cfg("modo", T=100)
    kappa = 3 * problem.lip_grad / problem.mu
    C = 2 * (np.linalg.norm(c.x0) + problem.minimizer_radius(S) * (1 + math.sqrt(2 * kappa)))
    for seed in range(5):
        traj = run_modo(problem, S, replace(c, seed=seed))
        assert np.linalg.norm(traj.xs, axis=1).max() <= C


def test_divergence_detected(sc_default):
    problem, S = sc_default
    with pytest.raises(DivergenceError, match="divergence at step") as info:
        run_modo(problem, S, cfg("modo", T=5000, alpha=5.0))
    assert info.value.t >= 1


def test_weights_stay_on_simplex(sc_default):
    problem, S = sc_default
    traj = run_modo(problem, S, cfg("modo", T=200, gamma=0.1))
    assert np.all(traj.lams >= 0)
    np.testing.assert_allclose(traj.lams.sum(axis=1), 1.0, atol=1e-12)


def test_mgda_stationary_start_stays():
    prob = Constant([[1.0, -1.0]])
    S = Dataset(np.zeros((3, 1)))
    c = AlgoConfig("mgda", 10, 0.1, 0.0, [0.5, 0.5], [1.0])
    traj = run_mgda(prob, S, c)
    np.testing.assert_allclose(traj.xs, 1.0, atol=1e-12)


def test_mgda_single_objective_is_gradient_descent():
    A = np.diag([1.0, 3.0])
    prob = QuadraticProblem(A, [1.0], [1.0])
    S = Dataset([[1.0, 1.0], [0.0, 1.0]])
    traj = run_mgda(prob, S, AlgoConfig("mgda", 20, 0.1, 0.0, [1.0], [0.0, 0.0]))
    x = np.zeros(2)
    for _ in range(20):
        x = x - 0.1 * (A @ x - S.mean())
    np.testing.assert_allclose(traj.final_x, x, atol=1e-12)


def test_mgda_converges_on_two_objective_quadratic():
    spec = ScQuadraticSpec(M=2, b1=(1.0, 2.0), b2=(1.0, 3.0))
    problem, S = make_sc_quadratic(spec)
    traj = run_mgda(problem, S, AlgoConfig("mgda", 2000, 0.05, 0.0, [0.5, 0.5], np.zeros(10)))
    assert ps_measure(problem.empirical_gradient_matrix(traj.final_x, S)) <= 1e-6


def test_static_uses_only_fixed_weights(sc_default):
    problem, S = sc_default
    c = AlgoConfig("static", 40, 0.01, 0.0, vertex(3, 1), np.zeros(10), 3)
    traj = run_static(problem, S, c)
    assert np.all(traj.lams == vertex(3, 1))
    # vertex weights: SGD on objective 1 alone
    x = np.zeros(10)
    for i in index_block(3, 40, S.n)[:, 2]:
        x = x - 0.01 * problem.per_sample_gradient_matrix(x, S[i])[:, 1]
    np.testing.assert_allclose(traj.final_x, x, atol=1e-12)


def test_static_single_objective_is_sgd():
    A = np.diag([1.0, 2.0])
    prob = QuadraticProblem(A, [1.0], [2.0])
    S = Dataset(np.random.default_rng(0).standard_normal((7, 2)))
    traj = run_static(prob, S, AlgoConfig("static", 30, 0.05, 0.0, [1.0], [1.0, 1.0], 4))
    x = np.array([1.0, 1.0])
    for i in index_block(4, 30, 7)[:, 2]:
        x = x - 0.05 * (A @ x - 2.0 * S[i])
    np.testing.assert_allclose(traj.final_x, x, atol=1e-12)


def test_dispatch_checks_algo(sc_default):
    problem, S = sc_default
    with pytest.raises(ValueError):
        run_modo(problem, S, cfg("static"))
    with pytest.raises(ValueError):
        run_static(problem, S, cfg("modo"))
    with pytest.raises(ValueError):
        run_mgda(problem, S, cfg("modo"))
    assert run(problem, S, cfg("mgda", T=2)).algo_used is Algo.MGDA
