"""Solution-based tabu memory: three hash functions over the selected set and
three bit vectors recording which hash values have been visited.

A solution hashes to ``h_v(S) = sum(floor(i ** gamma_v) for i in A) mod L`` with
``gamma = (1.2, 1.6, 2.0)``. The per-item weights are floored once, so the
incremental update for a move is exact integer arithmetic.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .solution import ADD, DROP, SWAP, Move, Solution

DEFAULT_LENGTH = 10**8
GAMMAS = (Fraction(6, 5), Fraction(8, 5), Fraction(2))
LOG_CAPACITY = 1 << 16


def _iroot(v: int, k: int) -> int:
    """Largest r with r**k <= v."""
    if v < 2:
        return v
    r = int(round(v ** (1.0 / k)))
    while r**k > v:
        r -= 1
    while (r + 1) ** k <= v:
        r += 1
    return r


def item_hash_weight(i: int, gamma: Fraction) -> int:
    """``floor(i ** gamma)`` computed exactly."""
    return _iroot(i**gamma.numerator, gamma.denominator)


def hash_weights(n: int) -> np.ndarray:
    """Array of shape (3, n): row v holds floor(i ** gamma_v) for i = 1..n."""
    out = np.empty((3, n), dtype=np.int64)
    for v, g in enumerate(GAMMAS):
        out[v] = [item_hash_weight(i, g) for i in range(1, n + 1)]
    return out


def hash_triple(sol: Solution, weights: np.ndarray | None = None, length: int = DEFAULT_LENGTH) -> tuple[int, int, int]:
    if weights is None:
        weights = hash_weights(sol.inst.n)
    sums = weights[:, sol.selected].sum(axis=1)
    return tuple(int(s) % length for s in sums)


def shift_triple(t, mv: Move, weights: np.ndarray, length: int = DEFAULT_LENGTH) -> tuple[int, int, int]:
    """Hash triple of ``S ⊕ mv`` given the triple ``t`` of ``S``."""
    out = []
    for v in range(3):
        h = t[v]
        if mv.kind in (DROP, SWAP):
            h -= int(weights[v, mv.q - 1])
        if mv.kind in (ADD, SWAP):
            h += int(weights[v, mv.p - 1])
        out.append(h % length)
    return tuple(out)


class ProhibitionStore:
    """Three bit vectors of ``length`` bits each, packed into uint64 words.

    Words written since the last :meth:`reset` are logged so that a reset only
    has to zero those; if the log overflows the whole store is cleared instead.
    """

    def __init__(self, length: int = DEFAULT_LENGTH):
        if length < 1:
            raise ValueError("hash vector length must be positive")
        self.length = int(length)
        words = (self.length + 63) // 64
        self.bits = np.zeros((3, words), dtype=np.uint64)
        self.log = np.zeros(LOG_CAPACITY, dtype=np.int64)
        # log[0:log_state[0]] are touched word indices; log_state[1] == 1 once overflowed
        self.log_state = np.zeros(2, dtype=np.int64)

    def reset(self) -> None:
        k, overflow = int(self.log_state[0]), int(self.log_state[1])
        if overflow:
            self.bits.fill(0)
        elif k:
            self.bits[:, self.log[:k]] = 0
        self.log_state[:] = 0

    def record(self, t) -> None:
        for v in range(3):
            h = int(t[v])
            word = h >> 6
            self.bits[v, word] |= np.uint64(1 << (h & 63))
            self._log(word)

    def _log(self, word: int) -> None:
        k = int(self.log_state[0])
        if k < self.log.size:
            self.log[k] = word
            self.log_state[0] = k + 1
        else:
            self.log_state[1] = 1

    def is_prohibited(self, t) -> bool:
        for v in range(3):
            h = int(t[v])
            if not (int(self.bits[v, h >> 6]) >> (h & 63)) & 1:
                return False
        return True

    def popcount(self, v: int) -> int:
        return int(np.unpackbits(self.bits[v].view(np.uint8)).sum())
