"""Counter-based sample-index streams keyed by ``(seed, t, slot)``.

Block ``t`` of a Philox stream keyed by ``seed`` yields four 64-bit words;
words 0, 1, 2 drive sampling slots 1, 2, 3 of step ``t``. The index for a
given ``(seed, t, slot)`` therefore never depends on how many steps are drawn
or on which other streams exist.
"""

import numpy as np

SLOTS = 3
_MASK64 = (1 << 64) - 1


def _key(seed: int) -> int:
    seed = int(seed)
    if not -(1 << 63) <= seed <= _MASK64:
        raise ValueError("seed must fit in 64 bits")
    return seed & _MASK64


def index_block(seed: int, T: int, n: int) -> np.ndarray:
    """``(T, 3)`` array of sample indices in ``[0, n)`` for steps ``0..T-1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if T <= 0:
        return np.zeros((0, SLOTS), dtype=np.int64)
    raw = np.random.Philox(key=_key(seed)).random_raw(4 * T).reshape(T, 4)[:, :SLOTS]
    # top 53 bits -> uniform double in [0, 1) -> floor(u * n)
    u = (raw >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
    return np.minimum((u * n).astype(np.int64), n - 1)


def index_at(seed: int, t: int, slot: int, n: int) -> int:
    """Single index for step ``t`` and slot ``slot`` in ``{1, 2, 3}``."""
    if slot not in (1, 2, 3):
        raise ValueError("slot must be 1, 2 or 3")
    return int(index_block(seed, t + 1, n)[t, slot - 1])


def data_rng(seed: int) -> np.random.Generator:
    """Generator for dataset synthesis, kept separate from index streams."""
    return np.random.Generator(np.random.PCG64(_key(seed)))
