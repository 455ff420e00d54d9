"""Synthetic objective suites with analytic gradients.

* :func:`make_sc_quadratic` - strongly convex quadratics
  ``f_{z,m}(x) = 0.5 b1_m x^T A x - b2_m z^T x``.
* :func:`make_toy_nonconvex` - the two-objective valley landscape with
  Gaussian data perturbations.
* :func:`make_lower_bound_example` - the quadratic pair ``(S, S')`` on which
  MoDo's argument stability is bounded from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import BoundConstants, Dataset, MolProblem, as_params, make_neighboring_dataset

# Indices into SeedSequence(data_seed).spawn(_STREAMS)
_STREAM_MATRIX, _STREAM_TRAIN, _STREAM_TEST, _STREAM_REPLACE = range(4)
_STREAMS = 4


def _streams(seed: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(_STREAMS)]


def random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


# ---------------------------------------------------------------------------
# Strongly convex quadratic family
# ---------------------------------------------------------------------------

class QuadraticProblem(MolProblem):
    """``f_{z,m}(x) = 0.5 b1_m x^T A x - b2_m z^T x``."""

    def __init__(self, A, b1, b2, z_mean=None, z_std: float = 0.0, name: str = "sc_quadratic"):
        A = np.array(A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if np.max(np.abs(A - A.T)) > 1e-12 * max(1.0, np.abs(A).max()):
            raise ValueError("A must be symmetric")
        eig = np.linalg.eigvalsh(A)
        if eig[0] < 1e-8:
            raise ValueError("A not positive definite")
        b1 = np.array(b1, dtype=float).reshape(-1)
        b2 = np.array(b2, dtype=float).reshape(-1)
        if b1.shape != b2.shape:
            raise ValueError("b1 and b2 must have the same length")
        if np.any(b1 <= 0):
            raise ValueError("b1 entries must be > 0")
        for arr in (A, b1, b2):
            arr.setflags(write=False)
        self.A, self.b1, self.b2 = A, b1, b2
        self.eig_min, self.eig_max = float(eig[0]), float(eig[-1])
        self.d, self.M = A.shape[0], b1.size
        self.sample_dim = self.d
        self.z_mean = None if z_mean is None else as_params(z_mean)
        self.z_std = float(z_std)
        self.name = name

    def per_sample_values(self, x, z):
        x = np.asarray(x, dtype=float)
        return 0.5 * self.b1 * float(x @ self.A @ x) - self.b2 * float(np.asarray(z) @ x)

    def per_sample_gradient_matrix(self, x, z):
        Ax = self.A @ np.asarray(x, dtype=float)
        return np.outer(Ax, self.b1) - np.outer(np.asarray(z, dtype=float), self.b2)

    def empirical_values(self, x, S):
        return self.per_sample_values(x, S.mean())

    def empirical_gradient_matrix(self, x, S):
        # linear in z, so the average over S is the gradient at the sample mean
        return self.per_sample_gradient_matrix(x, S.mean())

    def population_gradient_matrix(self, x):
        if self.z_mean is None:
            return None
        return self.per_sample_gradient_matrix(x, self.z_mean)

    def sample_population(self, rng, k):
        if self.z_mean is None:
            return None
        return self.z_mean + self.z_std * rng.standard_normal((k, self.d))

    def scalarized_minimizer(self, lam, z) -> np.ndarray:
        """Minimiser of ``F_z(x) lam``: ``(b2.lam / b1.lam) A^{-1} z``."""
        lam = np.asarray(lam, dtype=float)
        return (self.b2 @ lam) / (self.b1 @ lam) * np.linalg.solve(self.A, z)

    def iterate_radius(self, S: Dataset, x0) -> float:
        """Cap ``max{(1 + sqrt(2 kappa)) c_x*, |x0|}`` on MoDo iterates, ``kappa = 3 l_f1 / mu``."""
        kappa = 3.0 * self.lip_grad / self.mu
        return max((1.0 + math.sqrt(2.0 * kappa)) * self.minimizer_radius(S), float(np.linalg.norm(x0)))

    def minimizer_radius(self, S: Dataset) -> float:
        """``max_{lam, z in S} |x*_{lam,z}|``; the ratio peaks at a vertex."""
        ratio = float(np.max(np.abs(self.b2) / self.b1))
        sol = np.linalg.solve(self.A, S.samples.T)
        return ratio * float(np.linalg.norm(sol, axis=0).max())

    @property
    def mu(self) -> float:
        return float(self.b1.min()) * self.eig_min

    @property
    def lip_grad(self) -> float:
        return float(self.b1.max()) * self.eig_max

    def constants(self, S: Optional[Dataset] = None, x0=None) -> Optional[BoundConstants]:
        """Analytic constants; ``lip_val`` needs the data and ``x0`` to bound the iterates."""
        if S is None or x0 is None:
            return None
        c_star = self.minimizer_radius(S)
        c_x = self.iterate_radius(S, x0)
        lip_val = self.lip_grad * (c_x + c_star)
        lip_grad_frob = float(np.linalg.norm(self.b1)) * self.eig_max
        return BoundConstants.from_values(self.lip_grad, lip_val, self.mu, self.M,
                                          lip_grad_frob=lip_grad_frob)

    def initial_gap(self, x, lam, S: Dataset) -> float:
        """``F_S(x) lam - min_y F_S(y) lam`` in closed form."""
        lam = np.asarray(lam, dtype=float)
        zbar = S.mean()
        b1l, b2l = float(self.b1 @ lam), float(self.b2 @ lam)
        value = float(self.empirical_values(x, S) @ lam)
        minimum = -0.5 * b2l ** 2 / b1l * float(zbar @ np.linalg.solve(self.A, zbar))
        return value - minimum


@dataclass(frozen=True)
class ScQuadraticSpec:
    d: int = 10
    M: int = 3
    b1: tuple = (1.0, 2.0, 1.0)
    b2: tuple = (1.0, 3.0, 2.0)
    A: Optional[tuple] = None
    z_mean: Optional[tuple] = None
    z_std: float = 0.3
    n: int = 50
    data_seed: int = 0
    eig_low: float = 0.5
    eig_high: float = 5.0
    kind: str = field(default="sc_quadratic", repr=False)

    def __post_init__(self):
        if len(self.b1) != self.M or len(self.b2) != self.M:
            raise ValueError("b1 and b2 must have M entries")
        if self.n < 1 or self.d < 1:
            raise ValueError("need n >= 1 and d >= 1")
        if self.z_std < 0:
            raise ValueError("z_std must be >= 0")


def sc_matrix(spec: ScQuadraticSpec) -> np.ndarray:
    if spec.A is not None:
        return np.array(spec.A, dtype=float)
    rng = _streams(spec.data_seed)[_STREAM_MATRIX]
    Q = random_rotation(rng, spec.d)
    eig = np.exp(rng.uniform(math.log(spec.eig_low), math.log(spec.eig_high), spec.d))
    A = Q.T @ np.diag(eig) @ Q
    return 0.5 * (A + A.T)


def sc_mean(spec: ScQuadraticSpec) -> np.ndarray:
    if spec.z_mean is not None:
        return np.array(spec.z_mean, dtype=float)
    e = np.zeros(spec.d)
    e[0] = 1.0
    return e


def make_sc_quadratic(spec: ScQuadraticSpec = ScQuadraticSpec()) -> tuple[QuadraticProblem, Dataset]:
    """Build the strongly convex problem and its training set.

    Samples are ``z_i = z_mean + z_std g_i`` with standard Gaussian ``g_i``;
    rows are generated in order, so a dataset with larger ``n`` extends a
    smaller one drawn from the same ``data_seed``.
    """
    A = sc_matrix(spec)
    z_mean = sc_mean(spec)
    problem = QuadraticProblem(A, spec.b1, spec.b2, z_mean=z_mean, z_std=spec.z_std)
    g = _streams(spec.data_seed)[_STREAM_TRAIN].standard_normal((spec.n, spec.d))
    S = Dataset(z_mean + spec.z_std * g, id=f"sc-d{spec.d}-n{spec.n}-s{spec.data_seed}")
    return problem, S


def sc_test_set(spec: ScQuadraticSpec, n_test: int) -> Dataset:
    g = _streams(spec.data_seed)[_STREAM_TEST].standard_normal((n_test, spec.d))
    return Dataset(sc_mean(spec) + spec.z_std * g, id=f"sc-test-n{n_test}-s{spec.data_seed}")


def sc_replacement(spec: ScQuadraticSpec) -> np.ndarray:
    """A fresh population draw used to build neighbouring datasets."""
    g = _streams(spec.data_seed)[_STREAM_REPLACE].standard_normal(spec.d)
    return sc_mean(spec) + spec.z_std * g


# ---------------------------------------------------------------------------
# Nonconvex toy landscape
# ---------------------------------------------------------------------------

_CLAMP = 5e-6


def _log_ridge(a):
    """``log(max(|a|, 5e-6)) + 6`` and its derivative w.r.t. ``a``."""
    mag = abs(a)
    if mag > _CLAMP:
        return math.log(mag) + 6.0, math.copysign(1.0 / mag, a)
    return math.log(_CLAMP) + 6.0, 0.0


class ToyProblem(MolProblem):
    """Two objectives on ``R^2`` gated into a log-ridge half (``x2 > 0``) and a quadratic half."""

    d = 2
    M = 2
    sample_dim = 2
    name = "toy_nonconvex"

    def _parts(self, x, z):
        x1, x2 = float(x[0]), float(x[1])
        z1, z2 = float(z[0]), float(z[1])
        th = math.tanh(x2)
        sech2 = 1.0 - th * th
        half = math.tanh(0.5 * x2)
        dhalf = 0.5 * (1.0 - half * half)
        c1, dc1 = (half, dhalf) if half > 0 else (0.0, 0.0)
        c2, dc2 = (-half, -dhalf) if half < 0 else (0.0, 0.0)

        # -tanh(-x2) == tanh(x2)
        a1 = 0.5 * (-x1 - 7.0) + th
        a2 = 0.5 * (-x1 + 3.0) + th + 2.0
        h1, dh1 = _log_ridge(a1)
        h2, dh2 = _log_ridge(a2)
        gh1 = np.array([-0.5 * dh1, sech2 * dh1])
        gh2 = np.array([-0.5 * dh2, sech2 * dh2])

        quad1 = ((-x1 + 3.5) ** 2 + 0.1 * (-x2 - 1.0) ** 2) / 10.0 - 20.0
        quad2 = ((-x1 - 3.5) ** 2 + 0.1 * (-x2 - 1.0) ** 2) / 10.0 - 20.0
        g1 = quad1 - 2.0 * z1 * x1 - 5.5 * z2 * x2
        g2 = quad2 + 2.0 * z1 * x1 - 5.5 * z2 * x2
        gg1 = np.array([0.2 * (x1 - 3.5) - 2.0 * z1, 0.02 * (x2 + 1.0) - 5.5 * z2])
        gg2 = np.array([0.2 * (x1 + 3.5) + 2.0 * z1, 0.02 * (x2 + 1.0) - 5.5 * z2])

        values = np.array([c1 * h1 + c2 * g1, c1 * h2 + c2 * g2])
        dc = np.array([0.0, 1.0])
        grad = np.column_stack([
            c1 * gh1 + h1 * dc1 * dc + c2 * gg1 + g1 * dc2 * dc,
            c1 * gh2 + h2 * dc1 * dc + c2 * gg2 + g2 * dc2 * dc,
        ])
        return values, grad

    def per_sample_values(self, x, z):
        return self._parts(x, z)[0]

    def per_sample_gradient_matrix(self, x, z):
        return self._parts(x, z)[1]

    def empirical_values(self, x, S):
        return self.per_sample_values(x, S.mean())

    def empirical_gradient_matrix(self, x, S):
        return self.per_sample_gradient_matrix(x, S.mean())

    def population_values(self, x):
        return self.per_sample_values(x, np.zeros(2))

    def population_gradient_matrix(self, x):
        # z is zero-mean and enters linearly
        return self.per_sample_gradient_matrix(x, np.zeros(2))

    def sample_population(self, rng, k):
        return rng.standard_normal((k, 2))

    @staticmethod
    def near_kink(x, margin: float = 1e-3) -> bool:
        """True where the gates or the log clamp make the gradient nonsmooth."""
        x1, x2 = float(x[0]), float(x[1])
        th = math.tanh(x2)
        a1 = 0.5 * (-x1 - 7.0) + th
        a2 = 0.5 * (-x1 + 3.0) + th + 2.0
        return abs(x2) < margin or abs(a1) < margin or abs(a2) < margin


@dataclass(frozen=True)
class ToySpec:
    n: int = 20
    data_seed: int = 0
    kind: str = field(default="toy", repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")


TOY_INITIALIZATIONS = ((-8.5, 7.5), (-8.5, -5.0), (9.0, -1.0))


def make_toy_nonconvex(spec: ToySpec = ToySpec()) -> tuple[ToyProblem, Dataset]:
    z = _streams(spec.data_seed)[_STREAM_TRAIN].standard_normal((spec.n, 2))
    return ToyProblem(), Dataset(z, id=f"toy-n{spec.n}-s{spec.data_seed}")


def toy_test_set(spec: ToySpec, n_test: int) -> Dataset:
    z = _streams(spec.data_seed)[_STREAM_TEST].standard_normal((n_test, 2))
    return Dataset(z, id=f"toy-test-n{n_test}-s{spec.data_seed}")


# ---------------------------------------------------------------------------
# Stability lower-bound construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundSpec:
    n: int = 64
    d: int = 2
    T: int = 0
    j: int = -1
    perturbation: float = 0.1
    kind: str = field(default="lower_bound", repr=False)

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("lower-bound example needs n >= 8")
        if self.d < 1:
            raise ValueError("d must be >= 1")

    @property
    def mu(self) -> float:
        return 16.0 * self.n ** (-1.0 / 3.0)

    @property
    def horizon(self) -> int:
        """The given ``T`` or, when 0, the largest admissible ``ceil(4 n^(2/3))``."""
        return self.T if self.T > 0 else math.ceil(4.0 * self.n ** (2.0 / 3.0) - 1e-9)


LOWER_BOUND_B = (1.0, 1.0 + math.sqrt(2.0))


def make_lower_bound_example(spec: LowerBoundSpec = LowerBoundSpec()):
    """Return ``(problem, S, S_prime, v, j)``.

    ``A = diag(mu, 2 mu, ...)`` with ``mu = 16 n^(-1/3)``, ``v = e_1``;
    samples ``z_i = c_i v`` average to ``mu v`` on ``S`` and ``S'`` replaces
    ``z_j`` with ``z_j - v``.
    """
    n, mu = spec.n, spec.mu
    j = spec.j % n
    A = np.diag([mu] + [2.0 * mu] * (spec.d - 1))
    v = np.zeros(spec.d)
    v[0] = 1.0
    others = [i for i in range(n) if i != j]
    signs = np.array([(-1.0) ** k for k in range(len(others))])
    if len(others) % 2:
        signs[-1] = 0.0
    c = np.empty(n)
    c[others] = mu * n / (n - 1) * (1.0 + spec.perturbation * signs)
    c[j] = n * mu - c[others].sum()
    problem = QuadraticProblem(A, (1.0, 1.0), LOWER_BOUND_B, name="lower_bound")
    S = Dataset(np.outer(c, v), id=f"lb-n{n}")
    S_prime = make_neighboring_dataset(S, j, S.samples[j] - v)
    return problem, S, S_prime, v, j
