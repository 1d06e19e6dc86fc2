"""Exact optimum for small DCKP instances by depth-first branch and bound.

Meant as ground truth for tests and acceptance runs, not as a competitive solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance

MAX_ITEMS = 40
ENUMERATION_LIMIT = 20


@dataclass
class OracleResult:
    optimum: int
    items: list[int]
    nodes: int
    proven: bool
    method: str = "branch-and-bound"

    @property
    def status(self) -> str:
        return "optimal" if self.proven else "unproven"


class _BudgetExhausted(Exception):
    pass


def solve_enumerate(inst: Instance) -> OracleResult:
    """Check all 2^n subsets at once with numpy (n <= 20)."""
    n = inst.n
    if n > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration is limited to n <= {ENUMERATION_LIMIT}")
    codes = np.arange(1 << n, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n)) & 1).astype(bool)
    ok = bits.astype(np.int64) @ inst.weights <= inst.capacity
    for i, j in inst.edges.tolist():
        ok &= ~(bits[:, i - 1] & bits[:, j - 1])
    value = np.where(ok, bits.astype(np.int64) @ inst.profits, -1)
    k = int(np.argmax(value))
    return OracleResult(int(value[k]), (np.flatnonzero(bits[k]) + 1).tolist(), 1 << n, True, "enumeration")


def solve_exact(inst: Instance, node_budget: int = 10_000_000) -> OracleResult:
    """Maximise total profit over feasible subsets.

    Items are branched in decreasing profit/weight order (take first, then skip).
    A node is pruned when its profit plus the fractional-knapsack bound of the
    still-compatible, still-fitting items cannot beat the incumbent. Conflicts
    are ignored by the bound, which keeps it a valid relaxation.

    If ``node_budget`` runs out, instances with n <= 20 fall back to full
    enumeration; larger ones return the incumbent with ``proven=False``.
    """
    n = inst.n
    if n > MAX_ITEMS:
        raise ValueError(f"exact oracle refuses instances with more than {MAX_ITEMS} items")
    p = inst.profits.tolist()
    w = inst.weights.tolist()
    cap = inst.capacity
    order = sorted(range(n), key=lambda i: (-p[i] / w[i], i))
    pos = {item: k for k, item in enumerate(order)}
    ps = [p[i] for i in order]
    ws = [w[i] for i in order]
    conflict_mask = [0] * n
    for i, j in inst.edges.tolist():
        a, b = pos[i - 1], pos[j - 1]
        conflict_mask[a] |= 1 << b
        conflict_mask[b] |= 1 << a

    best_val = 0
    best_set = 0
    nodes = 0

    def bound(avail: int, room: int) -> float:
        total = 0.0
        while avail:
            low = avail & -avail
            k = low.bit_length() - 1
            if ws[k] <= room:
                room -= ws[k]
                total += ps[k]
            else:
                return total + ps[k] * room / ws[k]
            avail ^= low
        return total

    def dfs(avail: int, chosen: int, profit: int, room: int):
        nonlocal best_val, best_set, nodes
        nodes += 1
        if nodes > node_budget:
            raise _BudgetExhausted
        if profit > best_val:
            best_val, best_set = profit, chosen
        # drop items that no longer fit
        a = avail
        while a:
            low = a & -a
            if ws[low.bit_length() - 1] > room:
                avail ^= low
            a ^= low
        if not avail or profit + bound(avail, room) < best_val + 1 - 1e-9:
            return
        low = avail & -avail
        k = low.bit_length() - 1
        rest = avail ^ low
        dfs(rest & ~conflict_mask[k], chosen | low, profit + ps[k], room - ws[k])
        dfs(rest, chosen, profit, room)

    try:
        dfs((1 << n) - 1, 0, 0, cap)
    except _BudgetExhausted:
        if n <= ENUMERATION_LIMIT:
            res = solve_enumerate(inst)
            res.nodes += nodes
            return res
        items = sorted(order[k] + 1 for k in range(n) if best_set >> k & 1)
        return OracleResult(best_val, items, nodes, False)
    items = sorted(order[k] + 1 for k in range(n) if best_set >> k & 1)
    return OracleResult(best_val, items, nodes, True)
