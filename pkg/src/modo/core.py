"""Shared domain types: datasets, objective suites and bound constants.

Gradient matrices are plain ``(d, M)`` float arrays whose column ``m`` is the
gradient of objective ``m``. Weight vectors are 1-d arrays on the simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

# Library-wide default tolerances; every function that uses one accepts an override.
AVERAGING_TOL = 1e-12
SIMPLEX_SUM_TOL = 1e-10
SIMPLEX_NEG_TOL = 1e-12
CONSTANTS_TOL = 1e-9


class MolError(Exception):
    """Base class for errors raised by this package."""


class ConvergenceError(MolError):
    """Raised when an iterative solver exhausts its budget."""

    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class DivergenceError(MolError):
    """Raised when a trajectory produces non-finite or runaway iterates."""

    def __init__(self, message: str, t: int, x_norm: float, lam_norm: float):
        super().__init__(f"{message} (t={t}, |x|={x_norm:.6g}, |lambda|={lam_norm:.6g})")
        self.t = t
        self.x_norm = x_norm
        self.lam_norm = lam_norm


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def as_params(x) -> np.ndarray:
    """Validate and freeze a model parameter vector."""
    arr = _frozen(x).reshape(-1)
    if arr.size < 1:
        raise ValueError("model parameters need dimension d >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite model parameters")
    return arr


def is_simplex_point(lam, neg_tol: float = SIMPLEX_NEG_TOL,
                     sum_tol: float = SIMPLEX_SUM_TOL) -> bool:
    lam = np.asarray(lam, dtype=float)
    return bool(lam.ndim == 1 and lam.size >= 1 and np.all(np.isfinite(lam))
                and lam.min() >= -neg_tol and abs(lam.sum() - 1.0) <= sum_tol)


def as_weights(lam, neg_tol: float = SIMPLEX_NEG_TOL,
               sum_tol: float = SIMPLEX_SUM_TOL) -> np.ndarray:
    """Validate and freeze a weight vector on the probability simplex."""
    arr = _frozen(lam).reshape(-1)
    if not is_simplex_point(arr, neg_tol, sum_tol):
        raise ValueError(f"not a point of the probability simplex: {arr}")
    return arr


def check_gradient_matrix(G, d: Optional[int] = None, M: Optional[int] = None) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise ValueError("gradient matrix must be 2-d (d x M)")
    if (d is not None and G.shape[0] != d) or (M is not None and G.shape[1] != M):
        raise ValueError(f"gradient matrix shape {G.shape} != ({d}, {M})")
    if not np.all(np.isfinite(G)):
        raise ValueError("non-finite gradient matrix")
    return G


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable collection of ``n`` samples stored as an ``(n, d_z)`` array."""

    samples: np.ndarray
    id: str = "S"

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise ValueError("dataset needs n >= 1 samples")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def sample_dim(self) -> int:
        return self.samples.shape[1]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i):
        return self.samples[i]

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)


def make_neighboring_dataset(S: Dataset, index: int, replacement) -> Dataset:
    """Return a copy of ``S`` whose sample at ``index`` is ``replacement``."""
    if not 0 <= index < S.n:
        raise IndexError("index out of bounds")
    z = np.asarray(replacement, dtype=float).reshape(-1)
    if z.shape != (S.sample_dim,):
        raise ValueError("sample shape mismatch")
    samples = S.samples.copy()
    samples[index] = z
    return Dataset(samples, id=f"{S.id}~{index}")


@dataclass(frozen=True)
class BoundConstants:
    """Smoothness / gradient-size constants entering the theoretical bounds.

    ``lip_grad`` is the per-objective gradient Lipschitz constant, ``lip_val``
    bounds ``|grad F(x) lam|`` along trajectories and ``strong_convexity`` is 0
    for nonconvex problems.
    """

    lip_grad: float
    lip_grad_frob: float
    lip_val: float
    lip_val_frob: float
    strong_convexity: float
    num_objectives: int

    def __post_init__(self):
        for name in ("lip_grad", "lip_grad_frob", "lip_val", "lip_val_frob"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        if self.strong_convexity < 0:
            raise ValueError("strong_convexity must be >= 0")
        if self.num_objectives < 1:
            raise ValueError("num_objectives must be >= 1")
        expected = math.sqrt(self.num_objectives) * self.lip_val
        if abs(self.lip_val_frob - expected) > CONSTANTS_TOL * max(1.0, expected):
            raise ValueError("lip_val_frob must equal sqrt(M) * lip_val")

    @classmethod
    def from_values(cls, lip_grad, lip_val, strong_convexity, num_objectives,
                    lip_grad_frob=None) -> "BoundConstants":
        M = int(num_objectives)
        if lip_grad_frob is None:
            lip_grad_frob = math.sqrt(M) * lip_grad
        return cls(float(lip_grad), float(lip_grad_frob), float(lip_val),
                   math.sqrt(M) * float(lip_val), float(strong_convexity), M)

    def with_lip_val(self, lip_val: float) -> "BoundConstants":
        return replace(self, lip_val=float(lip_val),
                       lip_val_frob=math.sqrt(self.num_objectives) * float(lip_val))


class MolProblem:
    """An objective suite ``F_z(x) = [f_{z,1}(x), ..., f_{z,M}(x)]``.

    Subclasses implement :meth:`per_sample_values` and
    :meth:`per_sample_gradient_matrix`; the empirical versions default to
    averages over the dataset and may be overridden by closed forms.
    """

    name = "problem"
    d: int
    M: int
    sample_dim: int

    @property
    def dims(self) -> tuple[int, int]:
        return self.d, self.M

    # -- per-sample -------------------------------------------------------
    def per_sample_values(self, x, z) -> np.ndarray:
        raise NotImplementedError

    def per_sample_value(self, x, z, m: int) -> float:
        return float(self.per_sample_values(x, z)[m])

    def per_sample_gradient_matrix(self, x, z) -> np.ndarray:
        raise NotImplementedError

    # -- empirical --------------------------------------------------------
    def empirical_values(self, x, S: Dataset) -> np.ndarray:
        return np.mean([self.per_sample_values(x, z) for z in S.samples], axis=0)

    def empirical_gradient_matrix(self, x, S: Dataset) -> np.ndarray:
        total = np.zeros((self.d, self.M))
        for z in S.samples:
            total += self.per_sample_gradient_matrix(x, z)
        return total / S.n

    # -- population -------------------------------------------------------
    def population_gradient_matrix(self, x) -> Optional[np.ndarray]:
        """Analytic ``grad F(x)``, or ``None`` when unavailable."""
        return None

    def sample_population(self, rng: np.random.Generator, k: int) -> Optional[np.ndarray]:
        """Draw ``k`` fresh samples from the data distribution, if known."""
        return None

    def constants(self, S: Optional[Dataset] = None, x0=None) -> Optional[BoundConstants]:
        """Analytic bound constants for iterates started at ``x0``, if known."""
        return None


def finite_difference_gradient_check(problem: MolProblem, x, z, h: float = 1e-5) -> float:
    """Max relative error between central differences and analytic gradients.

    The error for entry ``(i, m)`` is ``|fd - g| / (1 + |g|)``.
    """
    if not h > 0:
        raise ValueError("h must be > 0")
    x = as_params(x)
    G = problem.per_sample_gradient_matrix(x, z)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fp = np.asarray(problem.per_sample_values(x + e, z), dtype=float)
        fm = np.asarray(problem.per_sample_values(x - e, z), dtype=float)
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise FloatingPointError("non-finite evaluation")
        fd = (fp - fm) / (2 * h)
        err = np.abs(fd - G[i]) / (1.0 + np.abs(G[i]))
        worst = max(worst, float(err.max()))
    return worst


@dataclass(frozen=True)
class ZeroProblem(MolProblem):
    """All objectives identically zero; a degenerate fixture."""

    d: int = 2
    M: int = 2
    sample_dim: int = 1
    name: str = field(default="zero")

    def per_sample_values(self, x, z):
        return np.zeros(self.M)

    def per_sample_gradient_matrix(self, x, z):
        return np.zeros((self.d, self.M))

    def population_gradient_matrix(self, x):
        return np.zeros((self.d, self.M))
