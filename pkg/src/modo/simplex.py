"""Euclidean projection onto the probability simplex."""

import numpy as np


def project_simplex(v) -> np.ndarray:
    """Project ``v`` onto ``{lam : lam >= 0, sum(lam) = 1}``.

    Sort-and-threshold in O(M log M); ties in the sort keep index order so
    the result is reproducible bit for bit.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size < 1:
        raise ValueError("invalid dimension")
    if not np.all(np.isfinite(v)):
        raise ValueError("non-finite input")
    # projection commutes with shifts by a constant; centring on the max avoids cancellation
    v = v - v.max()
    order = np.argsort(-v, kind="stable")
    u = v[order]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    active = u - css / k > 0
    active[0] = True  # exact arithmetic gives 1 here; rounding can lose it for huge entries
    rho = np.nonzero(active)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def uniform_weights(M: int) -> np.ndarray:
    if M < 1:
        raise ValueError("invalid dimension")
    return np.full(M, 1.0 / M)


def vertex(M: int, m: int) -> np.ndarray:
    e = np.zeros(M)
    e[m] = 1.0
    return e
