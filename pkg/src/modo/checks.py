"""Self-checks runnable without pytest (``modo check``).

Each suite compares a fast path against an independent oracle: refined
simplex grids, the two-objective closed form, finite differences, and the
static-weighting runner for MoDo at ``gamma = 0``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .algorithms import Algo, AlgoConfig, run_modo, run_static
from .core import finite_difference_gradient_check, is_simplex_point
from .minnorm import solve_min_norm, solve_min_norm_regularized
from .problems import (LowerBoundSpec, ScQuadraticSpec, ToyProblem, ToySpec, make_lower_bound_example,
                       make_sc_quadratic, make_toy_nonconvex)
from .simplex import project_simplex, uniform_weights


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

def simplex_grid(pitch: float) -> np.ndarray:
    """All points of the 2-simplex whose coordinates are multiples of ``pitch``."""
    k = int(round(1.0 / pitch))
    i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
    keep = i + j <= k
    i, j = i[keep], j[keep]
    return np.column_stack([i, j, k - i - j]) / k


def refined_grid_min(f, pitch: float = 1e-3, levels: int = 4, width: int = 20) -> np.ndarray:
    """Minimise ``f`` (vectorised over rows) on the 2-simplex by grid search with local zooms.

    After the global grid, each level searches a ``(2 width + 1)^2`` patch
    around the incumbent at a pitch ten times finer.
    """
    pts = simplex_grid(pitch)
    best = pts[np.argmin(f(pts))]
    h = pitch
    for _ in range(levels):
        h /= 10.0
        off = np.arange(-width, width + 1) * h
        a, b = np.meshgrid(off, off, indexing="ij")
        cand = best + np.column_stack([a.ravel(), b.ravel(), -(a + b).ravel()])
        cand = cand[np.all(cand >= -1e-15, axis=1)]
        cand = np.maximum(cand, 0.0)
        cand /= cand.sum(axis=1, keepdims=True)
        cand = np.vstack([cand, best])
        best = cand[np.argmin(f(cand))]
    return best


def grid_min_norm_value(G, **kw) -> float:
    """``min |G lam|`` over the 2-simplex by refined grid search."""
    Q = G.T @ G
    lam = refined_grid_min(lambda L: np.einsum("ij,jk,ik->i", L, Q, L), **kw)
    return float(np.linalg.norm(G @ lam))


def closed_form_two(G) -> float:
    """``min |G lam|`` for M = 2 via ``lam_1 = clip(<g2 - g1, g2>/|g1 - g2|^2, 0, 1)``."""
    g1, g2 = G[:, 0], G[:, 1]
    denom = float((g1 - g2) @ (g1 - g2))
    l1 = 0.5 if denom == 0 else float(np.clip((g2 - g1) @ g2 / denom, 0.0, 1.0))
    return float(np.linalg.norm(l1 * g1 + (1 - l1) * g2))


def grid_projection(v, **kw) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return refined_grid_min(lambda L: np.sum((L - v) ** 2, axis=1), pitch=1e-2, levels=4, width=15, **kw)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def _timed(name, fn) -> CheckResult:
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # a crashing suite is a failing suite
        passed, detail = False, f"error: {exc!r}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - t0)


def check_gamma_zero_equivalence(T: int = 1000, seeds=(0, 1, 2, 3, 4)) -> CheckResult:
    def body():
        problem, S = make_sc_quadratic(ScQuadraticSpec())
        x0 = np.zeros(problem.d)
        lam0 = uniform_weights(problem.M)
        for seed in seeds:
            a = run_modo(problem, S, AlgoConfig(Algo.MODO, T, 0.01, 0.0, lam0, x0, seed))
            b = run_static(problem, S, AlgoConfig(Algo.STATIC, T, 0.01, 0.0, lam0, x0, seed))
            if not (np.array_equal(a.xs, b.xs) and np.array_equal(a.ts, b.ts)):
                return False, f"trajectories differ for seed {seed}"
        return True, f"{len(seeds)} seeds x T={T} bit-identical"
    return _timed("gamma=0 equivalence", body)


def check_min_norm(instances: int = 200, seed: int = 0) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst_ps = worst_c1 = worst_c4 = 0.0
        for k in range(instances):
            M = (2, 3)[k % 2]
            d = (2, 5, 20)[(k // 2) % 3]
            G = rng.standard_normal((d, M)) * rng.uniform(0.1, 3.0)
            sol = solve_min_norm(G)
            oracle = closed_form_two(G) if M == 2 else grid_min_norm_value(G)
            worst_ps = max(worst_ps, abs(sol.ps_value - oracle))
            Gl = G @ sol.weights
            for m in range(M):
                worst_c1 = max(worst_c1, float(Gl @ Gl - Gl @ G[:, m]))
            for rho in (1e-3, 1e-1):
                reg = solve_min_norm_regularized(G, rho)
                diff = reg.ps_value ** 2 - sol.ps_value ** 2
                worst_c4 = max(worst_c4, -diff, diff - rho * (1 - 1 / M))
        ok = worst_ps <= 1e-5 and worst_c1 <= 1e-8 and worst_c4 <= 1e-8
        return ok, (f"{instances} instances: max |ps - oracle|={worst_ps:.2e}, "
                    f"inner-product slack={worst_c1:.2e}, rho sandwich slack={worst_c4:.2e}")
    return _timed("min-norm correctness", body)


def check_projection(count: int = 1000, seed: int = 0) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst_grid = worst_exp = 0.0
        for k in range(count):
            M = (2, 3, 5, 10)[k % 4]
            v = rng.uniform(-5, 5, M)
            lam = project_simplex(v)
            if not is_simplex_point(lam):
                return False, f"output off the simplex for v={v}"
            if M == 3:
                worst_grid = max(worst_grid, float(np.abs(lam - grid_projection(v)).max()))
            u = rng.uniform(-5, 5, M)
            gap = np.linalg.norm(project_simplex(u) - lam) - np.linalg.norm(u - v)
            worst_exp = max(worst_exp, float(gap))
        ok = worst_grid <= 1e-4 and worst_exp <= 1e-12
        return ok, f"{count} vectors: max grid deviation={worst_grid:.2e}, expansion={worst_exp:.2e}"
    return _timed("simplex projection", body)


def check_gradients(points: int = 20, seed: int = 0, h: float = 1e-5, threshold: float = 1e-4) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = {}
        problem, S = make_sc_quadratic(ScQuadraticSpec())
        worst["sc_quadratic"] = max(
            finite_difference_gradient_check(problem, rng.standard_normal(problem.d) * 2, S[k % S.n], h)
            for k in range(points))
        toy, St = make_toy_nonconvex(ToySpec())
        errs = []
        while len(errs) < points:
            x = rng.uniform(-10, 10, 2)
            if ToyProblem.near_kink(x):
                continue
            errs.append(finite_difference_gradient_check(toy, x, St[len(errs) % St.n], h))
        worst["toy_nonconvex"] = max(errs)
        lb, Sl, _, _, _ = make_lower_bound_example(LowerBoundSpec())
        worst["lower_bound"] = max(
            finite_difference_gradient_check(lb, rng.standard_normal(lb.d) * 5, Sl[k % Sl.n], h)
            for k in range(points))
        ok = all(v <= threshold for v in worst.values())
        return ok, ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
    return _timed("gradient fidelity", body)


def run_all() -> list[CheckResult]:
    return [check_gamma_zero_equivalence(), check_min_norm(), check_projection(), check_gradients()]
