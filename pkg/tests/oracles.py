"""Independent reference computations for the test-suite.

Nothing here imports the package: these are slow, obvious implementations that
the fast paths are checked against.
"""

from itertools import combinations, product

import mpmath


def brute_force(profits, weights, capacity, edges):
    """Best feasible (value, items) over all subsets; items are 1-based."""
    n = len(profits)
    conflict = {frozenset(e) for e in edges}
    best = (0, ())
    for mask in range(1 << n):
        items = [i + 1 for i in range(n) if mask >> i & 1]
        if sum(weights[i - 1] for i in items) > capacity:
            continue
        if any(frozenset(pair) in conflict for pair in combinations(items, 2)):
            continue
        value = sum(profits[i - 1] for i in items)
        if value > best[0]:
            best = (value, tuple(items))
    return best


def feasible(profits, weights, capacity, edges, items):
    items = set(items)
    if sum(weights[i - 1] for i in items) > capacity:
        return False
    return not any(i in items and j in items for i, j in edges)


_EXPONENTS = {"1.2": (6, 5), "1.6": (8, 5), "2.0": (2, 1)}


def power_floor(i, gamma: str) -> int:
    """floor(i ** gamma) from a 60-digit power, settled exactly when it lands near an integer."""
    a, b = _EXPONENTS[gamma]
    with mpmath.workdps(60):
        x = mpmath.power(i, mpmath.mpf(a) / b)
        r = int(mpmath.nint(x))
        if abs(x - r) < mpmath.mpf(10) ** -30:
            # r <= i^(a/b) iff r^b <= i^a
            return r if r ** b <= i ** a else r - 1
        return int(mpmath.floor(x))


def hash_oracle(items, length=10**8):
    return tuple(sum(power_floor(i, g) for i in items) % length for g in ("1.2", "1.6", "2.0"))


def wilcoxon_exact_p(diffs):
    """Two-sided p-value by enumerating all 2^n sign flips of the ranks."""
    d = [x for x in diffs if x != 0]
    mags = sorted(abs(x) for x in d)
    # average ranks for tied magnitudes
    ranks = {}
    k = 0
    while k < len(mags):
        j = k
        while j < len(mags) and mags[j] == mags[k]:
            j += 1
        ranks[mags[k]] = (k + 1 + j) / 2
        k = j
    r = [ranks[abs(x)] for x in d]
    w_plus = sum(ri for ri, x in zip(r, d) if x > 0)
    total = sum(r)
    observed = min(w_plus, total - w_plus)
    hits = 0
    for signs in product((0, 1), repeat=len(r)):
        wp = sum(ri for ri, s in zip(r, signs) if s)
        if min(wp, total - wp) <= observed + 1e-12:
            hits += 1
    return observed, hits / 2 ** len(r)


def admissible_moves(profits, weights, capacity, edges, items, threshold, prohibited=lambda s: False):
    """Admissible neighbours per neighbourhood (add, swap, drop) of ``items``.

    A neighbour is admissible when it is feasible, has value >= threshold and
    ``prohibited(frozenset)`` is false for it.
    """
    items = frozenset(items)
    n = len(profits)

    def ok(s):
        return (feasible(profits, weights, capacity, edges, s)
                and sum(profits[i - 1] for i in s) >= threshold and not prohibited(frozenset(s)))

    outside = [p for p in range(1, n + 1) if p not in items]
    adds = [("add", None, p) for p in outside if ok(items | {p})]
    swaps = [("swap", q, p) for q in items for p in outside if ok((items - {q}) | {p})]
    drops = [("drop", q, None) for q in items if ok(items - {q})]
    return adds, swaps, drops
