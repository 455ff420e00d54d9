"""Min-norm point of the convex hull of objective gradients.

Solves ``min_{lam in simplex} |G lam|^2 (+ rho |lam|^2)`` by projected
gradient descent, which yields the conflict-avoidant direction
``d(x) = -G lam*`` and the Pareto-stationarity measure ``min |G lam|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConvergenceError, check_gradient_matrix
from .simplex import project_simplex, uniform_weights

DEFAULT_TOL = 1e-10
_COND_CAP = 1e4
_POLISH_EVERY = 10


@dataclass(frozen=True)
class MinNormSolution:
    weights: np.ndarray
    direction: np.ndarray
    ps_value: float
    iterations: int
    kkt_residual: float


def _gap(Q, rho, lam):
    # Frank-Wolfe gap max_m <grad h(lam), lam - e_m>; zero iff lam is optimal.
    g = Q @ lam + rho * lam
    return max(0.0, float(lam @ g - g.min())), g


def _objective(Q, rho, lam):
    return 0.5 * float(lam @ Q @ lam) + 0.5 * rho * float(lam @ lam)


def _polish(Q, rho, support):
    """Minimiser of the quadratic on the affine hull of ``support`` (entries may be negative)."""
    idx = np.flatnonzero(support)
    k = idx.size
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = Q[np.ix_(idx, idx)] + rho * np.eye(k)
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
    if not np.all(np.isfinite(sol)):
        return None
    lam = np.zeros(Q.shape[0])
    lam[idx] = sol[:k]
    return lam


def _toward(lam, target):
    """Furthest point of the segment ``lam -> target`` inside the simplex."""
    step = target - lam
    neg = step < 0
    t = 1.0 if not neg.any() else min(1.0, float(np.min(lam[neg] / -step[neg])))
    out = np.maximum(lam + t * step, 0.0)
    out[out < 1e-15] = 0.0
    return out / out.sum()


def _refine(Q, rho, lam):
    """Exact minimiser on the final support, shrinking it while weights leave."""
    for _ in range(Q.shape[0]):
        cand = _polish(Q, rho, lam > 0)
        if cand is None:
            break
        moved = _toward(lam, cand)
        if _objective(Q, rho, moved) > _objective(Q, rho, lam):
            break
        done = np.array_equal(moved > 0, lam > 0)
        lam = moved
        if done:
            break
    return lam


def default_max_iters(Q, ev=None) -> int:
    M = Q.shape[0]
    ev = np.linalg.eigvalsh(Q) if ev is None else ev
    top = ev[-1]
    positive = ev[ev > 1e-12 * max(top, 1e-300)]
    cond = min(top / positive[0], _COND_CAP) if positive.size else 1.0
    return int(100 * M * max(cond, 1.0))


def _solve(G, rho, tol, max_iters, init=None) -> MinNormSolution:
    G = check_gradient_matrix(G)
    if not tol > 0:
        raise ValueError("tol must be > 0")
    M = G.shape[1]
    Q = G.T @ G
    ev = np.linalg.eigvalsh(Q)
    top = float(ev[-1])
    if max_iters is None:
        max_iters = default_max_iters(Q, ev)
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    lam = uniform_weights(M) if init is None else project_simplex(init)

    if M == 1 or top == 0.0:
        # Single point simplex, or every weight is optimal; uniform is then exact.
        lam = np.ones(1) if M == 1 else uniform_weights(M)
        return _finish(G, lam, 0, 0.0)

    step = 1.0 / (top + rho)
    scale = tol * (1.0 + top)
    best, best_h = lam, _objective(Q, rho, lam)
    tried = None
    for it in range(max_iters + 1):
        gap, g = _gap(Q, rho, lam)
        if gap <= scale:
            return _done(G, Q, rho, lam, it)
        support = lam > 0
        # re-solve on the support whenever it changes, and periodically otherwise
        if tried is None or not np.array_equal(support, tried) or it % _POLISH_EVERY == 0:
            tried = support
            # include the Frank-Wolfe vertex so a missing weight can enter the support
            grow = support.copy()
            grow[int(np.argmin(g))] = True
            cand = _polish(Q, rho, grow)
            if cand is not None:
                # active-set move: walk toward the face minimiser, dropping a weight that hits 0
                moved = _toward(lam, cand)
                if _objective(Q, rho, moved) <= _objective(Q, rho, lam):
                    lam = moved
                    if _objective(Q, rho, lam) < best_h:
                        best, best_h = lam, _objective(Q, rho, lam)
                    gap, g = _gap(Q, rho, lam)
                    if gap <= scale:
                        return _done(G, Q, rho, lam, it)
                    if not np.array_equal(lam > 0, support):
                        tried = None
                        continue
        if it == max_iters:
            break
        lam = project_simplex(lam - step * g)
        h = _objective(Q, rho, lam)
        if h < best_h:
            best, best_h = lam, h
    best_gap, _ = _gap(Q, rho, best)
    raise ConvergenceError("no convergence", best=_finish(G, best, max_iters, best_gap))


def _done(G, Q, rho, lam, iterations) -> MinNormSolution:
    refined = _refine(Q, rho, lam)
    gap, _ = _gap(Q, rho, refined)
    return _finish(G, refined, iterations, gap)


def _finish(G, lam, iterations, gap) -> MinNormSolution:
    lam = np.array(lam, dtype=float)
    Glam = G @ lam
    return MinNormSolution(lam, -Glam, float(np.linalg.norm(Glam)), int(iterations), float(gap))


def solve_min_norm(G, tol: float = DEFAULT_TOL, max_iters: int | None = None,
                   init=None) -> MinNormSolution:
    """Find ``lam* in argmin_{simplex} |G lam|^2``.

    Parameters
    ----------
    G : (d, M) array
        Stacked objective gradients.
    tol : float
        Relative tolerance on the Frank-Wolfe gap, scaled by ``1 + |G^T G|_2``.
    max_iters : int, optional
        Iteration budget; defaults to ``100 * M * min(cond(G^T G), 1e4)``.
    init : array, optional
        Warm start; uniform weights otherwise.

    Raises
    ------
    ConvergenceError
        If the budget runs out; ``err.best`` holds the best iterate found.
    """
    return _solve(G, 0.0, tol, max_iters, init)


def solve_min_norm_regularized(G, rho: float, tol: float = DEFAULT_TOL,
                               max_iters: int | None = None) -> MinNormSolution:
    """Solve ``min_{simplex} |G lam|^2 + rho |lam|^2`` (unique minimiser)."""
    if not rho > 0:
        raise ValueError("rho must be > 0")
    return _solve(G, float(rho), tol, max_iters)


def ps_measure(G, tol: float = DEFAULT_TOL) -> float:
    """Pareto-stationarity measure ``min_{lam in simplex} |G lam|``."""
    return solve_min_norm(G, tol).ps_value


def ca_distance(G, lam, tol: float = DEFAULT_TOL, solution: MinNormSolution | None = None) -> float:
    """Squared distance ``|G lam - G lam*|^2`` to the conflict-avoidant direction."""
    G = check_gradient_matrix(G)
    if solution is None:
        solution = solve_min_norm(G, tol)
    diff = G @ np.asarray(lam, dtype=float) + solution.direction
    return float(diff @ diff)
