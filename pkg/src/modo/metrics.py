"""Optimization / generalization / conflict-avoidance measurements and bound values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import BoundConstants, Dataset, MolError, MolProblem
from .minnorm import DEFAULT_TOL, ca_distance, solve_min_norm

ANALYTIC = "analytic"
TEST_SET = "test_set"


@dataclass(frozen=True)
class MetricRecord:
    """One evaluation row.

    ``r_opt`` and ``r_pop`` are the PS measures on the training data and on
    the population (analytic gradient, else a held-out test set);
    ``r_gen = r_pop - r_opt``. ``ps_pop`` is the analytic population PS
    measure, NaN when the problem has none.
    """

    t: int
    r_opt: float
    r_pop: float
    r_gen: float
    e_ca: float
    pop_source: str
    ps_pop: float = math.nan


def evaluate_point(problem: MolProblem, S: Dataset, S_test: Optional[Dataset], x, lam,
                   tol: float = DEFAULT_TOL, t: int = 0) -> MetricRecord:
    G_S = problem.empirical_gradient_matrix(x, S)
    sol = solve_min_norm(G_S, tol)
    e_ca = ca_distance(G_S, lam, tol, solution=sol)
    G_pop = problem.population_gradient_matrix(x)
    ps_pop = math.nan if G_pop is None else solve_min_norm(G_pop, tol).ps_value
    if G_pop is not None:
        r_pop, source = ps_pop, ANALYTIC
    elif S_test is not None:
        r_pop, source = solve_min_norm(problem.empirical_gradient_matrix(x, S_test), tol).ps_value, TEST_SET
    else:
        raise MolError("no population oracle")
    return MetricRecord(int(t), sol.ps_value, r_pop, r_pop - sol.ps_value, e_ca, source, ps_pop)


@dataclass(frozen=True)
class TrajectoryMetrics:
    records: list
    avg_r_opt: float
    avg_e_ca: float
    avg_r_pop: float

    @property
    def final(self) -> MetricRecord:
        return self.records[-1]


def evaluate_trajectory(problem: MolProblem, S: Dataset, S_test: Optional[Dataset], traj,
                        tol: float = DEFAULT_TOL) -> TrajectoryMetrics:
    """Per-state records plus time averages over the recorded states with ``t >= 1``.

    A trajectory with only its initial state averages over that one state.
    """
    if len(traj.ts) == 0:
        raise ValueError("trajectory has no recorded states")
    records = [evaluate_point(problem, S, S_test, x, lam, tol, t)
               for t, x, lam in zip(traj.ts.tolist(), traj.xs, traj.lams)]
    later = [r for r in records if r.t >= 1] or records
    return TrajectoryMetrics(
        records,
        float(np.mean([r.r_opt for r in later])),
        float(np.mean([r.e_ca for r in later])),
        float(np.mean([r.r_pop for r in later])),
    )


# ---------------------------------------------------------------------------
# Bound right-hand sides
# ---------------------------------------------------------------------------

def ca_bound_rhs(constants: BoundConstants, alpha: float, gamma: float, T: int) -> float:
    """``4/(gamma T) + 6 sqrt(M l_f1 l_f^2 alpha/gamma) + gamma M l_f^4``."""
    if gamma <= 0:
        raise ValueError("bound undefined at γ=0")
    if T < 1:
        raise ValueError("T must be >= 1")
    M, lf1, lf = constants.num_objectives, constants.lip_grad, constants.lip_val
    return 4.0 / (gamma * T) + 6.0 * math.sqrt(M * lf1 * lf ** 2 * alpha / gamma) + gamma * M * lf ** 4


def opt_bound_rhs(constants: BoundConstants, c_F: float, alpha: float, gamma: float, T: int) -> float:
    """``sqrt(c_F/(2 alpha T)) + sqrt(gamma (M l_f^4 + 2 l_F^3 l_f)/2) + sqrt(alpha l_f1 l_f^2 / 2)``."""
    if alpha > 1.0 / (2.0 * constants.lip_grad):
        raise ValueError("step size too large for bound")
    if c_F < 0:
        raise ValueError("c_F must be >= 0")
    if T < 1:
        raise ValueError("T must be >= 1")
    M, lf1 = constants.num_objectives, constants.lip_grad
    lf, lF = constants.lip_val, constants.lip_val_frob
    return (math.sqrt(c_F / (2.0 * alpha * T))
            + math.sqrt(0.5 * gamma * (M * lf ** 4 + 2.0 * lF ** 3 * lf))
            + math.sqrt(0.5 * alpha * lf1 * lf ** 2))


# ---------------------------------------------------------------------------
# Constants and initial suboptimality
# ---------------------------------------------------------------------------

SAFETY = 1.1


def estimate_constants(problem: MolProblem, S: Dataset, xs: Sequence) -> BoundConstants:
    """Trajectory-based constants for problems without analytic ones.

    ``lip_val`` is the largest per-sample gradient column norm seen on the
    iterates and ``lip_grad`` the largest gradient difference quotient between
    consecutive iterates, both inflated by ``SAFETY``. Strong convexity is 0.
    """
    xs = [np.asarray(x, dtype=float) for x in xs]
    col_max = 0.0
    lip = 0.0
    prev = None
    for x in xs:
        grads = [problem.per_sample_gradient_matrix(x, z) for z in S.samples]
        col_max = max(col_max, max(float(np.linalg.norm(G, axis=0).max()) for G in grads))
        if prev is not None:
            step = float(np.linalg.norm(x - prev[0]))
            if step > 1e-12:
                for G, Gp in zip(grads, prev[1]):
                    lip = max(lip, float(np.linalg.norm(G - Gp, axis=0).max()) / step)
        prev = (x, grads)
    lip = lip if lip > 0 else 1.0
    col_max = col_max if col_max > 0 else 1.0
    return BoundConstants.from_values(SAFETY * lip, SAFETY * col_max, 0.0, problem.M)


def initial_gap(problem: MolProblem, S: Dataset, x0, lam0, steps: int = 5000,
                alpha: float = 1e-2) -> float:
    """``F_S(x0) lam0 - min_x F_S(x) lam0``.

    Closed form for quadratics; otherwise the minimum is approximated by a
    full-batch gradient run of ``steps`` iterations on the scalarized objective.
    """
    lam0 = np.asarray(lam0, dtype=float)
    if hasattr(problem, "initial_gap"):
        return max(0.0, float(problem.initial_gap(x0, lam0, S)))
    x = np.asarray(x0, dtype=float)
    start = float(problem.empirical_values(x, S) @ lam0)
    best = start
    for _ in range(steps):
        x = x - alpha * (problem.empirical_gradient_matrix(x, S) @ lam0)
        best = min(best, float(problem.empirical_values(x, S) @ lam0))
    return max(0.0, start - best)
