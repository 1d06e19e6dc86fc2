"""Population management: random greedy initialisation, double-backbone
crossover and goodness-score based pool updating."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hashing import ProhibitionStore
from .instance import Instance
from .solution import Solution
from .threshold import TspParams, iter_max, run_tsp

DEFAULT_BETA = 0.6


def pop_size(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    return n // 100 + 5


@dataclass
class Population:
    members: list[Solution]
    beta: float = DEFAULT_BETA
    # times the elite guard kept the unique best member from being deleted
    elite_saves: int = field(default=0)
    # updates that deleted a duplicate instead of the lowest score
    duplicates: int = field(default=0)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def best(self) -> Solution:
        return max(self.members, key=lambda s: s.profit)

    def pick_parents(self, rng: np.random.Generator) -> tuple[Solution, Solution]:
        if len(self.members) == 1:
            return self.members[0], self.members[0]
        i, j = rng.choice(len(self.members), size=2, replace=False)
        return self.members[i], self.members[j]


def random_greedy(inst: Instance, rng: np.random.Generator) -> Solution:
    """Add uniformly random compatible items until none fits.

    Scanning a random permutation once is equivalent to repeatedly drawing a
    uniform item among those still addable, since addability never comes back.
    """
    sol = Solution(inst)
    for i in rng.permutation(inst.n) + 1:
        if sol.can_add(int(i)):
            sol.add(int(i))
    return sol


def init_population(inst: Instance, rng: np.random.Generator, size: int | None = None,
                    tsp_params: TspParams | None = None, store: ProhibitionStore | None = None,
                    tsp_rng: np.random.Generator | None = None, deadline: float | None = None) -> Population:
    """Build ``size`` random greedy solutions, each refined by a short threshold search.

    ``tsp_params`` supplies policy/acceptance settings; its ``iter_max`` is
    replaced by the initialisation budget ``2n``.
    """
    size = pop_size(inst.n) if size is None else size
    tsp_rng = rng if tsp_rng is None else tsp_rng
    base = tsp_params or TspParams(iter_max=iter_max(inst.n, "init"))
    if store is None and base.op_enabled:
        store = ProhibitionStore()
    members = []
    for _ in range(size):
        sol = random_greedy(inst, rng)
        params = TspParams(iter_max=iter_max(inst.n, "init"), policy=base.policy, acceptance=base.acceptance,
                           op_enabled=base.op_enabled, absolute_threshold=base.absolute_threshold,
                           seed=int(tsp_rng.integers(0, 2**32)))
        members.append(run_tsp(inst, sol, params, store, deadline=deadline).best)
    return Population(members)


def crossover(si: Solution, sj: Solution, rng: np.random.Generator) -> Solution:
    """Double-backbone crossover.

    Keeps every common item, then tries the items owned by exactly one parent in
    random order, adding each one that keeps the offspring feasible. Items in
    neither parent are never considered.
    """
    if si.inst is not sj.inst:
        raise ValueError("parents belong to different instances")
    for s in (si, sj):
        if s.weight > s.inst.capacity or (s.conflict[s.selected] != 0).any():
            raise ValueError("crossover needs feasible parents")
    common = si.selected & sj.selected
    child = Solution.from_mask(si.inst, common)
    unique = np.flatnonzero(si.selected ^ sj.selected) + 1
    for a in rng.permutation(unique):
        if child.can_add(int(a)):
            child.add(int(a))
    return child


def _normalise(y: np.ndarray) -> np.ndarray:
    return (y - y.min()) / (y.max() - y.min() + 1.0)


def distance_matrix(pool: list[Solution]) -> np.ndarray:
    sel = np.array([s.selected for s in pool], dtype=np.int8)
    # |A xor B| = |A| + |B| - 2 |A & B|
    inter = sel @ sel.T.astype(np.int64)
    sizes = np.diag(inter)
    return sizes[:, None] + sizes[None, :] - 2 * inter


def goodness_scores(pool: list[Solution], beta: float = DEFAULT_BETA) -> np.ndarray:
    """Score every pool member by ``beta * A(f) + (1 - beta) * A(D)``.

    ``D`` is a member's minimum Hamming distance to the rest of the pool and
    ``A(y) = (y - min y) / (max y - min y + 1)`` over the pool.
    """
    f = np.array([s.profit for s in pool], dtype=np.float64)
    if len(pool) < 2:
        return beta * _normalise(f)
    dist = distance_matrix(pool).astype(np.float64)
    np.fill_diagonal(dist, np.inf)
    return scores_from_values(f, dist.min(axis=1), beta)


def scores_from_values(f, d, beta: float = DEFAULT_BETA) -> np.ndarray:
    """Goodness scores from objective values ``f`` and minimum distances ``d``."""
    f = np.asarray(f, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    return beta * _normalise(f) + (1.0 - beta) * _normalise(d)


def goodness_score(pool: list[Solution], index: int, beta: float = DEFAULT_BETA) -> float:
    return float(goodness_scores(pool, beta)[index])


def _newest_duplicate(pool: list[Solution], dist: np.ndarray) -> int | None:
    """Index of the latest member that equals an earlier one, if any."""
    for k in range(len(pool) - 1, 0, -1):
        if (dist[k, :k] == 0).any():
            return k
    return None


def update_pool(pop: Population, candidate: Solution) -> Population:
    """Insert ``candidate``, then delete one member.

    If the enlarged pool holds identical solutions, the most recently inserted
    copy is deleted (a rejected duplicate candidate leaves the pool as it was).
    Otherwise the member with the lowest goodness score goes, ties against the
    newest. The unique best member by objective is never the one deleted; the
    next-lowest score goes instead.
    """
    pool = pop.members + [candidate]
    dist = distance_matrix(pool)
    victim = _newest_duplicate(pool, dist)
    if victim is not None:
        pop.duplicates += 1
    else:
        f = np.array([s.profit for s in pool], dtype=np.float64)
        d = dist.astype(np.float64)
        np.fill_diagonal(d, np.inf)
        scores = scores_from_values(f, d.min(axis=1), pop.beta)
        order = sorted(range(len(pool)), key=lambda k: (scores[k], -k))
        victim = order[0]
        top = np.flatnonzero(f == f.max())
        if len(top) == 1 and victim == top[0]:
            victim = order[1]
            pop.elite_saves += 1
    del pool[victim]
    pop.members = pool
    return pop
