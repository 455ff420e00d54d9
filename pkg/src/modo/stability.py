"""Empirical argument / MOL-uniform stability on neighbouring datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .algorithms import Algo, AlgoConfig, run
from .core import BoundConstants, Dataset, MolProblem
from .minnorm import DEFAULT_TOL

FRESH_PROBES = 16


@dataclass(frozen=True)
class StabilityReport:
    n: int
    num_seeds: int
    arg_stability: float
    arg_stability_sq: float
    mol_stability_sq: float
    arg_stability_se: float
    arg_stability_sq_se: float
    mol_stability_sq_se: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _stderr(values) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def check_neighboring(S: Dataset, S_prime: Dataset) -> int:
    """Number of differing positions; raises unless it is at most one."""
    if S.n != S_prime.n or S.sample_dim != S_prime.sample_dim:
        raise ValueError("not neighboring")
    differs = int(np.any(S.samples != S_prime.samples, axis=1).sum())
    if differs > 1:
        raise ValueError("not neighboring")
    return differs


def default_probes(problem: MolProblem, S: Dataset, S_prime: Dataset, seed: int = 0,
                   fresh: int = FRESH_PROBES) -> np.ndarray:
    """All samples of ``S`` and ``S'`` plus ``fresh`` population draws when available."""
    probes = [S.samples, S_prime.samples]
    extra = problem.sample_population(np.random.default_rng(seed), fresh)
    if extra is not None:
        probes.append(np.asarray(extra, dtype=float))
    return np.unique(np.vstack(probes), axis=0)


def estimate_stability(problem: MolProblem, S: Dataset, S_prime: Dataset, cfg: AlgoConfig,
                       num_seeds: int, probe_samples: Optional[Sequence] = None,
                       seeds: Optional[Sequence[int]] = None,
                       tol: float = DEFAULT_TOL) -> StabilityReport:
    """Run the coupled pair ``A(S)``, ``A(S')`` for each seed and measure final-iterate gaps.

    Both runs of a pair share one seed, hence one index stream; their
    difference comes only from the replaced sample. ``sup_z`` is a max over
    ``probe_samples``.
    """
    check_neighboring(S, S_prime)
    if num_seeds < 2:
        raise ValueError("num_seeds must be >= 2")
    if seeds is None:
        seeds = [cfg.seed + k for k in range(num_seeds)]
    if len(seeds) != num_seeds:
        raise ValueError("need one seed per replica")
    if probe_samples is None:
        probe_samples = default_probes(problem, S, S_prime)
    probes = np.asarray(probe_samples, dtype=float)

    dist = np.empty(num_seeds)
    frob = np.empty((num_seeds, len(probes)))
    for k, seed in enumerate(seeds):
        c = replace(cfg, seed=int(seed), record_every=max(cfg.T, 1))
        x = run(problem, S, c, tol).final_x
        xp = run(problem, S_prime, c, tol).final_x
        dist[k] = np.linalg.norm(x - xp)
        for p, z in enumerate(probes):
            diff = problem.per_sample_gradient_matrix(x, z) - problem.per_sample_gradient_matrix(xp, z)
            frob[k, p] = float(np.sum(diff * diff))
    per_probe = frob.mean(axis=0)
    worst = int(np.argmax(per_probe))
    return StabilityReport(
        n=S.n,
        num_seeds=num_seeds,
        arg_stability=float(dist.mean()),
        arg_stability_sq=float((dist ** 2).mean()),
        mol_stability_sq=float(per_probe[worst]),
        arg_stability_se=_stderr(dist),
        arg_stability_sq_se=_stderr(dist ** 2),
        mol_stability_sq_se=_stderr(frob[:, worst]),
    )


def stability_upper_value(constants: BoundConstants, alpha: float, gamma: float, n: int,
                          M: Optional[int] = None) -> float:
    """Strongly convex MOL-stability bound
    ``48/(mu n) l_f^2 l_F1^2 (alpha + (12 + 4 M l_f^2)/(mu n) + 10 M l_f^4 gamma / mu)``.
    """
    mu = constants.strong_convexity
    if mu <= 0:
        raise ValueError("strongly convex bound needs mu > 0")
    M = constants.num_objectives if M is None else M
    lf, lF1 = constants.lip_val, constants.lip_grad_frob
    return (48.0 / (mu * n)) * lf ** 2 * lF1 ** 2 * (
        alpha + (12.0 + 4.0 * M * lf ** 2) / (mu * n) + 10.0 * M * lf ** 4 * gamma / mu)


def gamma_cap(constants: BoundConstants, T: int) -> float:
    """Largest ``gamma`` admitted by the strongly convex stability bound at horizon ``T``."""
    mu, lf, lF = constants.strong_convexity, constants.lip_val, constants.lip_val_frob
    lg1 = lf * constants.lip_grad_frob + lF * constants.lip_grad
    return min(mu ** 2 / (120.0 * lf ** 2 * lg1), 1.0 / (8.0 * (3.0 * lf ** 2 + 2.0 * lg1))) / T


def lower_bound_value(gamma: float, T: int, n: int) -> float:
    """``gamma T / (2 n^2) + 1 / (16 n)``."""
    return gamma * T / (2.0 * n ** 2) + 1.0 / (16.0 * n)


def lower_bound_config(problem, S: Dataset, v, T: int, seed: int = 0) -> AlgoConfig:
    """MoDo settings for the lower-bound check: ``x0 = 7 v``, uniform ``lambda0``,
    ``alpha = 1/(4 mu T)`` and ``gamma = 1/(2 M T l_F l_f)``.
    """
    x0 = 7.0 * np.asarray(v, dtype=float)
    consts = problem.constants(S, x0)
    mu = consts.strong_convexity
    M = consts.num_objectives
    alpha = 1.0 / (4.0 * mu * T)
    gamma = 1.0 / (2.0 * M * T * consts.lip_val_frob * consts.lip_val)
    return AlgoConfig(Algo.MODO, T, alpha, gamma, np.full(M, 1.0 / M), x0, seed, record_every=T)
