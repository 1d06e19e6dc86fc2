"""Threshold search: token-ring exploration of the add / swap / drop neighbourhoods
with threshold acceptance, dynamic filtering and hash-based solution prohibition.

The search loop is compiled with numba. It works on the raw arrays of a
:class:`~dckp.solution.Solution` and a :class:`~dckp.hashing.ProhibitionStore`
and is resumable: :func:`run_tsp` drives it in chunks so a wall-clock deadline
can be honoured between chunks.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numba as nb
import numpy as np

from .hashing import DEFAULT_LENGTH, ProhibitionStore, hash_triple, hash_weights
from .instance import Instance
from .solution import Move, Solution

POLICIES = ("set1", "set2")
ACCEPTANCE = ("threshold", "first", "best")

# neighbourhood / move codes shared with the kernel
NONE, N_ADD, N_SWAP, N_DROP = 0, 1, 2, 3
RUNNING, BUDGET_EXHAUSTED, NEIGHBORHOODS_EXHAUSTED = 0, 1, 2
REASONS = {BUDGET_EXHAUSTED: "budget_exhausted", NEIGHBORHOODS_EXHAUSTED: "neighborhoods_exhausted",
           RUNNING: "deadline"}

# layout of the int64 state vector
F, W, H1, H2, H3, FB, WB, T, ITER, DONE, NEED_T = range(11)
STATE_SIZE = 11
# layout of the int64 parameter vector
P_POLICY, P_MARGIN, P_MINP, P_ABSOLUTE, P_ACCEPT, P_OP, P_ITERMAX, P_LENGTH, P_CAP = range(9)

TRACE_COLUMNS = ("iter", "f", "f_best", "threshold", "neighborhood", "q", "p", "h1", "h2", "h3")


def threshold_value(policy: str, inst: Instance, f_best: int, rng=None, absolute: bool = False) -> int:
    """Acceptance threshold for the current best value.

    ``set1``: ``f_best - floor(n / 10)``. ``set2``: a margin ``MinP + U`` with
    ``U`` uniform in ``{0, ..., 19}`` redrawn on every call, so the threshold is
    ``f_best - margin`` (or the bare margin with ``absolute=True``).
    """
    if policy == "set1":
        return int(f_best) - inst.n // 10
    if policy == "set2":
        rng = np.random.default_rng() if rng is None else rng
        margin = int(inst.profits.min()) + int(rng.integers(0, 20))
        return margin if absolute else int(f_best) - margin
    raise ValueError(f"unknown threshold policy {policy!r}")


def iter_max(n: int, phase: str = "main") -> int:
    """Iterations without improvement before a TSP run stops."""
    if n < 1:
        raise ValueError("n must be positive")
    if phase == "main":
        return (n // 500 + 5) * 10000
    if phase == "init":
        return 2 * n
    raise ValueError(f"unknown phase {phase!r}")


@dataclass
class TspParams:
    iter_max: int
    policy: str = "set1"
    acceptance: str = "threshold"
    op_enabled: bool = True
    absolute_threshold: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.iter_max < 1:
            raise ValueError("iter_max must be at least 1")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown threshold policy {self.policy!r}")
        if self.acceptance not in ACCEPTANCE:
            raise ValueError(f"unknown acceptance policy {self.acceptance!r}")


@dataclass
class TspResult:
    best: Solution
    iterations: int
    reason: str
    final: Solution
    trace: np.ndarray | None = None


# ------------------------------------------------------------------ kernel


@nb.njit(cache=True)
def _seed(s):
    np.random.seed(s)


@nb.njit(cache=True)
def _kernel_threshold(params, f_best):
    if params[P_POLICY] == 0:
        return f_best - params[P_MARGIN]
    margin = params[P_MINP] + np.random.randint(0, 20)
    if params[P_ABSOLUTE] == 1:
        return margin
    return f_best - margin


@nb.njit(cache=True, inline="always")
def _shifted(h, minus, plus, length):
    return ((h - minus + plus) % length + length) % length


@nb.njit(cache=True, inline="always")
def _bit(bits, v, h):
    return (bits[v, h >> 6] >> np.uint64(h & 63)) & np.uint64(1)


@nb.njit(cache=True)
def _prohibited(bits, h1, h2, h3):
    return _bit(bits, 0, h1) == 1 and _bit(bits, 1, h2) == 1 and _bit(bits, 2, h3) == 1


@nb.njit(cache=True)
def _record(bits, log, log_state, h1, h2, h3):
    hs = (h1, h2, h3)
    for v in range(3):
        h = hs[v]
        word = h >> 6
        bits[v, word] |= np.uint64(1) << np.uint64(h & 63)
        k = log_state[0]
        if k < log.size:
            log[k] = word
            log_state[0] = k + 1
        else:
            log_state[1] = 1


@nb.njit(cache=True)
def _scan(profits, weights, adj, hw, bits, sel, conf, state, params):
    """Examine N1, N2, N3 in turn; return (neighbourhood, q, p) of the move to accept.

    q and p are 0-based; neighbourhood 0 means no admissible move exists.
    """
    n = profits.size
    cap = params[P_CAP]
    length = params[P_LENGTH]
    accept = params[P_ACCEPT]
    use_op = params[P_OP] == 1
    f = state[F]
    w = state[W]
    h1, h2, h3 = state[H1], state[H2], state[H3]
    thr = state[T]

    n_in = 0
    for i in range(n):
        if sel[i]:
            n_in += 1
    inside = np.empty(n_in, np.int64)
    outside = np.empty(n - n_in, np.int64)
    a = 0
    b = 0
    for i in range(n):
        if sel[i]:
            inside[a] = i
            a += 1
        else:
            outside[b] = i
            b += 1

    # N1: uniform choice among admissible adds (best profit for best-improvement)
    chosen = -1
    seen = 0
    best_val = -1
    for p in outside:
        if conf[p] != 0 or w + weights[p] > cap:
            continue
        fp = f + profits[p]
        if accept == 0 and fp < thr:
            continue
        if use_op and _prohibited(bits, _shifted(h1, 0, hw[0, p], length),
                                  _shifted(h2, 0, hw[1, p], length),
                                  _shifted(h3, 0, hw[2, p], length)):
            continue
        if accept == 2:
            if fp > best_val:
                best_val = fp
                chosen = p
                seen = 1
            elif fp == best_val:
                seen += 1
                if np.random.randint(0, seen) == 0:
                    chosen = p
        else:
            seen += 1
            if np.random.randint(0, seen) == 0:
                chosen = p
    if chosen >= 0:
        return N_ADD, -1, chosen

    # N2: swaps in random order with dynamic filtering against the best admissible value seen
    if n_in > 0 and n_in < n:
        inside_perm = inside[np.random.permutation(n_in)]
        outside_perm = outside[np.random.permutation(n - n_in)]
        fc = np.iinfo(np.int64).min
        if accept != 0:
            fc = f  # descents only consider strict improvements
        bq = -1
        bp = -1
        for q in inside_perm:
            wq = w - weights[q]
            fq = f - profits[q]
            for p in outside_perm:
                fp = fq + profits[p]
                if fp <= fc:
                    continue
                if wq + weights[p] > cap:
                    continue
                if conf[p] - adj[q, p] != 0:
                    continue
                if use_op and _prohibited(bits, _shifted(h1, hw[0, q], hw[0, p], length),
                                          _shifted(h2, hw[1, q], hw[1, p], length),
                                          _shifted(h3, hw[2, q], hw[2, p], length)):
                    continue
                fc = fp
                if accept == 0:
                    if fp >= thr:
                        return N_SWAP, q, p
                elif accept == 1:
                    return N_SWAP, q, p
                else:
                    bq = q
                    bp = p
        if bq >= 0:
            return N_SWAP, bq, bp

    # N3: drops, explored like N2; never improving so descents stop here
    if accept == 0 and n_in > 0:
        inside_perm = inside[np.random.permutation(n_in)]
        fc = np.iinfo(np.int64).min
        for q in inside_perm:
            fq = f - profits[q]
            if fq <= fc:
                continue
            if use_op and _prohibited(bits, _shifted(h1, hw[0, q], 0, length),
                                      _shifted(h2, hw[1, q], 0, length),
                                      _shifted(h3, hw[2, q], 0, length)):
                continue
            fc = fq
            if fq >= thr:
                return N_DROP, q, -1
    return NONE, -1, -1


@nb.njit(cache=True)
def _flip(i, on, profits, weights, nbr_ptr, nbr_idx, hw, sel, conf, state, length):
    d = 1 if on else -1
    sel[i] = on
    state[F] += d * profits[i]
    state[W] += d * weights[i]
    for k in range(nbr_ptr[i], nbr_ptr[i + 1]):
        conf[nbr_idx[k]] += d
    for v in range(3):
        state[H1 + v] = ((state[H1 + v] + d * hw[v, i]) % length + length) % length


@nb.njit(cache=True)
def _run_chunk(profits, weights, adj, nbr_ptr, nbr_idx, hw, bits, log, log_state,
               sel, conf, best_sel, state, params, max_steps, trace, trace_state):
    length = params[P_LENGTH]
    use_op = params[P_OP] == 1
    if state[NEED_T] == 1:
        state[T] = _kernel_threshold(params, state[FB])
        state[NEED_T] = 0
    steps = 0
    while steps < max_steps:
        if state[ITER] > params[P_ITERMAX]:
            return BUDGET_EXHAUSTED
        kind, q, p = _scan(profits, weights, adj, hw, bits, sel, conf, state, params)
        if kind == NONE:
            return NEIGHBORHOODS_EXHAUSTED
        if q >= 0:
            _flip(q, False, profits, weights, nbr_ptr, nbr_idx, hw, sel, conf, state, length)
        if p >= 0:
            _flip(p, True, profits, weights, nbr_ptr, nbr_idx, hw, sel, conf, state, length)
        if use_op:
            _record(bits, log, log_state, state[H1], state[H2], state[H3])
        if state[F] > state[FB]:
            best_sel[:] = sel
            state[FB] = state[F]
            state[WB] = state[W]
            state[ITER] = 0
            state[T] = _kernel_threshold(params, state[FB])
        else:
            state[ITER] += 1
        state[DONE] += 1
        steps += 1
        k = trace_state[0]
        if k < trace.shape[0]:
            trace[k, 0] = state[DONE]
            trace[k, 1] = state[F]
            trace[k, 2] = state[FB]
            trace[k, 3] = state[T]
            trace[k, 4] = kind
            trace[k, 5] = q + 1
            trace[k, 6] = p + 1
            trace[k, 7] = state[H1]
            trace[k, 8] = state[H2]
            trace[k, 9] = state[H3]
            trace_state[0] = k + 1
    return RUNNING


# ----------------------------------------------------------------- wrappers


@lru_cache(maxsize=8)
def _cached_hash_weights(n: int) -> np.ndarray:
    hw = hash_weights(n)
    hw.flags.writeable = False
    return hw


def _params_vector(inst: Instance, params: TspParams, length: int) -> np.ndarray:
    return np.array([
        POLICIES.index(params.policy),
        inst.n // 10,
        int(inst.profits.min()),
        int(params.absolute_threshold),
        ACCEPTANCE.index(params.acceptance),
        int(params.op_enabled),
        params.iter_max,
        length,
        inst.capacity,
    ], dtype=np.int64)


def _state_vector(sol: Solution, hw: np.ndarray, length: int) -> np.ndarray:
    state = np.zeros(STATE_SIZE, dtype=np.int64)
    state[F] = state[FB] = sol.profit
    state[W] = state[WB] = sol.weight
    state[H1:H3 + 1] = hash_triple(sol, hw, length)
    state[NEED_T] = 1
    return state


def scan_neighborhoods(inst: Instance, sol: Solution, threshold: int, store: ProhibitionStore | None = None,
                       rng=None, acceptance: str = "threshold") -> Move | None:
    """One token-ring examination of N1, N2, N3 from ``sol``.

    Returns the move to accept or ``None`` if no neighbourhood holds an
    admissible (feasible, non-prohibited, threshold-satisfying) neighbour.
    """
    rng = np.random.default_rng() if rng is None else rng
    length = store.length if store is not None else DEFAULT_LENGTH
    bits = store.bits if store is not None else np.zeros((3, 1), dtype=np.uint64)
    hw = _cached_hash_weights(inst.n)
    p = TspParams(iter_max=1, acceptance=acceptance, op_enabled=store is not None)
    params = _params_vector(inst, p, length)
    state = _state_vector(sol, hw, length)
    state[T] = threshold
    _seed(int(rng.integers(0, 2**31 - 1)))
    kind, q, pp = _scan(inst.profits, inst.weights, inst.adjacency, hw, bits,
                        sol.selected, sol.conflict, state, params)
    if kind == N_ADD:
        return Move.add(pp + 1)
    if kind == N_SWAP:
        return Move.swap(q + 1, pp + 1)
    if kind == N_DROP:
        return Move.drop(q + 1)
    return None


def run_tsp(inst: Instance, s0: Solution, params: TspParams, store: ProhibitionStore | None = None,
            reset_store: bool = True, deadline: float | None = None, chunk: int = 4096,
            trace: int = 0) -> TspResult:
    """Threshold search from the feasible solution ``s0`` (left unmodified).

    ``store`` is reset at the start unless ``reset_store`` is false. With a
    ``deadline`` (``time.perf_counter()`` value) the run also stops once the
    deadline has passed, checked every ``chunk`` iterations. ``trace`` > 0 keeps
    up to that many per-iteration rows (see ``TRACE_COLUMNS``).
    """
    if s0.inst is not inst:
        raise ValueError("solution belongs to another instance")
    if s0.weight > inst.capacity or (s0.conflict[s0.selected] != 0).any():
        raise ValueError("threshold search needs a feasible starting solution")
    if store is None:
        store = ProhibitionStore(DEFAULT_LENGTH if params.op_enabled else 64)
    elif reset_store:
        store.reset()
    length = store.length
    hw = _cached_hash_weights(inst.n)
    cur = s0.copy()
    best_sel = cur.selected.copy()
    state = _state_vector(cur, hw, length)
    pv = _params_vector(inst, params, length)
    trace_buf = np.zeros((trace, len(TRACE_COLUMNS)), dtype=np.int64)
    trace_state = np.zeros(1, dtype=np.int64)
    _seed(params.seed % (2**32))
    steps = chunk if deadline is not None else np.iinfo(np.int64).max
    while True:
        status = _run_chunk(inst.profits, inst.weights, inst.adjacency, inst.nbr_ptr, inst.nbr_idx, hw,
                            store.bits, store.log, store.log_state, cur.selected, cur.conflict, best_sel,
                            state, pv, steps, trace_buf, trace_state)
        if status != RUNNING or (deadline is not None and time.perf_counter() >= deadline):
            break
    cur.profit, cur.weight = int(state[F]), int(state[W])
    best = Solution.from_mask(inst, best_sel)
    return TspResult(best=best, iterations=int(state[DONE]), reason=REASONS[status], final=cur,
                     trace=trace_buf[:trace_state[0]] if trace else None)
