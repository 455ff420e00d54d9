"""Trajectory runners: MoDo, full-batch MGDA and static weighting."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import ConvergenceError, Dataset, DivergenceError, MolProblem, as_params, as_weights
from .minnorm import DEFAULT_TOL, solve_min_norm
from .rng import index_block
from .simplex import project_simplex

DIVERGENCE_NORM = 1e12


class Algo(str, Enum):
    MODO = "modo"
    MGDA = "mgda"
    STATIC = "static"


@dataclass(frozen=True)
class AlgoConfig:
    """Run configuration. MGDA ignores ``gamma`` and ``seed``; static ignores ``gamma``."""

    algo: Algo
    T: int
    alpha: float
    gamma: float
    lambda0: np.ndarray
    x0: np.ndarray
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        object.__setattr__(self, "algo", Algo(self.algo))
        object.__setattr__(self, "lambda0", as_weights(self.lambda0))
        object.__setattr__(self, "x0", as_params(self.x0))
        if self.T < 0:
            raise ValueError("T must be >= 0")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if not self.gamma >= 0:
            raise ValueError("gamma must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Recorded states ``(t, x_t, lam_t)`` of one run.

    ``indices[t]`` holds the three sample indices drawn at step ``t`` (MoDo),
    the slot-3 index in column 2 (static), or nothing (MGDA).
    """

    ts: np.ndarray
    xs: np.ndarray
    lams: np.ndarray
    indices: np.ndarray
    config: AlgoConfig
    dataset_id: str
    algo_used: Algo = field(default=None)

    @property
    def states(self):
        return list(zip(self.ts.tolist(), self.xs, self.lams))

    @property
    def sampled_indices(self):
        return [(t, *map(int, row)) for t, row in enumerate(self.indices)]

    @property
    def final_x(self) -> np.ndarray:
        return self.xs[-1]

    @property
    def final_lambda(self) -> np.ndarray:
        return self.lams[-1]


def _guard(x, lam, t):
    nx = float(np.linalg.norm(x))
    if not np.isfinite(nx) or nx > DIVERGENCE_NORM or not np.all(np.isfinite(lam)):
        raise DivergenceError("divergence at step", t, nx, float(np.linalg.norm(lam)))


def modo_step(problem: MolProblem, S: Dataset, x, lam, alpha: float, gamma: float,
              indices) -> tuple[np.ndarray, np.ndarray]:
    """One double-sampling update.

    ``lam' = P(lam - gamma G1^T G2 lam)`` first, then ``x' = x - alpha G3 lam'``
    where ``Gs`` is the per-sample gradient matrix at ``z_{indices[s]}``.
    """
    i1, i2, i3 = (int(i) for i in indices)
    if gamma != 0.0:
        G1 = problem.per_sample_gradient_matrix(x, S.samples[i1])
        G2 = G1 if i2 == i1 else problem.per_sample_gradient_matrix(x, S.samples[i2])
        pre = lam - gamma * (G1.T @ (G2 @ lam))
        if not np.all(np.isfinite(pre)):
            raise FloatingPointError("non-finite weight update")
        lam = project_simplex(pre)
    # gamma == 0: the projection of a simplex point is itself, so lam is kept as is
    G3 = problem.per_sample_gradient_matrix(x, S.samples[i3])
    return x - alpha * (G3 @ lam), lam


class _Recorder:
    def __init__(self, cfg: AlgoConfig):
        self.cfg = cfg
        self.ts, self.xs, self.lams = [0], [np.array(cfg.x0)], [np.array(cfg.lambda0)]

    def maybe(self, t, x, lam):
        if t % self.cfg.record_every == 0 or t == self.cfg.T:
            self.ts.append(t)
            self.xs.append(x)
            self.lams.append(lam)

    def build(self, indices, S, algo):
        return Trajectory(np.array(self.ts), np.array(self.xs), np.array(self.lams),
                          indices, self.cfg, S.id, algo)


def _run_sampled(problem, S, cfg, gamma):
    idx = index_block(cfg.seed, cfg.T, S.n)
    rec = _Recorder(cfg)
    x, lam = np.array(cfg.x0), np.array(cfg.lambda0)
    for t in range(cfg.T):
        try:
            x, lam = modo_step(problem, S, x, lam, cfg.alpha, gamma, idx[t])
        except FloatingPointError as exc:
            raise DivergenceError(f"divergence at step ({exc})", t + 1, np.nan, np.nan) from exc
        _guard(x, lam, t + 1)
        rec.maybe(t + 1, x, lam)
    return rec, idx


def run_modo(problem: MolProblem, S: Dataset, cfg: AlgoConfig) -> Trajectory:
    """MoDo: three i.i.d. uniform indices per step from the keyed stream of ``cfg.seed``."""
    if cfg.algo is not Algo.MODO:
        raise ValueError("run_modo needs algo=modo")
    rec, idx = _run_sampled(problem, S, cfg, cfg.gamma)
    return rec.build(idx, S, Algo.MODO)


def run_static(problem: MolProblem, S: Dataset, cfg: AlgoConfig) -> Trajectory:
    """Fixed weights ``lambda0``; consumes only slot 3 of the index stream."""
    if cfg.algo is not Algo.STATIC:
        raise ValueError("run_static needs algo=static")
    idx = index_block(cfg.seed, cfg.T, S.n)
    rec = _Recorder(cfg)
    x, lam = np.array(cfg.x0), np.array(cfg.lambda0)
    for t in range(cfg.T):
        G3 = problem.per_sample_gradient_matrix(x, S.samples[int(idx[t, 2])])
        x = x - cfg.alpha * (G3 @ lam)
        _guard(x, lam, t + 1)
        rec.maybe(t + 1, x, lam)
    return rec.build(idx[:, 2:3], S, Algo.STATIC)


def run_mgda(problem: MolProblem, S: Dataset, cfg: AlgoConfig, tol: float = DEFAULT_TOL) -> Trajectory:
    """Deterministic MGDA on the full-batch gradient ``grad F_S``."""
    if cfg.algo is not Algo.MGDA:
        raise ValueError("run_mgda needs algo=mgda")
    rec = _Recorder(cfg)
    x = np.array(cfg.x0)
    for t in range(cfg.T):
        G = problem.empirical_gradient_matrix(x, S)
        try:
            sol = solve_min_norm(G, tol)
        except ConvergenceError as exc:
            raise ConvergenceError(f"no convergence at step {t}", best=exc.best) from exc
        x = x + cfg.alpha * sol.direction
        _guard(x, sol.weights, t + 1)
        rec.maybe(t + 1, x, sol.weights)
    return rec.build(np.zeros((0, 3), dtype=np.int64), S, Algo.MGDA)


def run(problem: MolProblem, S: Dataset, cfg: AlgoConfig, tol: float = DEFAULT_TOL) -> Trajectory:
    if cfg.algo is Algo.MODO:
        return run_modo(problem, S, cfg)
    if cfg.algo is Algo.STATIC:
        return run_static(problem, S, cfg)
    return run_mgda(problem, S, cfg, tol)
