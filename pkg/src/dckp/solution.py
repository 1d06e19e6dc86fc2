"""Candidate solutions with cached profit, weight and per-item conflict counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .instance import Instance

ADD, DROP, SWAP = "add", "drop", "swap"


@dataclass(frozen=True)
class Move:
    """An add(p), drop(q) or swap(q, p) move on 1-based item indices."""

    kind: str
    q: int = 0
    p: int = 0

    @classmethod
    def add(cls, p: int) -> "Move":
        return cls(ADD, 0, p)

    @classmethod
    def drop(cls, q: int) -> "Move":
        return cls(DROP, q, 0)

    @classmethod
    def swap(cls, q: int, p: int) -> "Move":
        if q == p:
            raise ValueError("swap needs two distinct items")
        return cls(SWAP, q, p)

    def __str__(self):
        if self.kind == ADD:
            return f"add({self.p})"
        if self.kind == DROP:
            return f"drop({self.q})"
        return f"swap({self.q},{self.p})"


class Solution:
    """A subset ``A`` of items plus the caches the local search relies on.

    ``conflict[i - 1]`` counts the selected neighbours of item ``i`` whether or
    not ``i`` itself is selected, so an unselected item ``p`` is compatible with
    ``A`` iff ``conflict[p - 1] == 0``.
    """

    __slots__ = ("inst", "selected", "conflict", "profit", "weight")

    def __init__(self, inst: Instance, items: Iterable[int] = ()):
        self.inst = inst
        self.selected = np.zeros(inst.n, dtype=np.bool_)
        self.conflict = np.zeros(inst.n, dtype=np.int64)
        self.profit = 0
        self.weight = 0
        for i in items:
            self.add(int(i))

    @classmethod
    def from_mask(cls, inst: Instance, mask) -> "Solution":
        mask = np.asarray(mask, dtype=np.bool_)
        sol = cls(inst)
        sol.selected[:] = mask
        sol.profit = int(inst.profits[mask].sum())
        sol.weight = int(inst.weights[mask].sum())
        sol.conflict[:] = inst.adjacency[mask].sum(axis=0)
        return sol

    def copy(self) -> "Solution":
        other = Solution.__new__(Solution)
        other.inst = self.inst
        other.selected = self.selected.copy()
        other.conflict = self.conflict.copy()
        other.profit = self.profit
        other.weight = self.weight
        return other

    # -- queries

    @property
    def items(self) -> list[int]:
        """Selected items, 1-based, ascending."""
        return (np.flatnonzero(self.selected) + 1).tolist()

    def __contains__(self, i: int) -> bool:
        return bool(self.selected[i - 1])

    def __len__(self):
        return int(self.selected.sum())

    def __eq__(self, other):
        if not isinstance(other, Solution):
            return NotImplemented
        return self.inst is other.inst and np.array_equal(self.selected, other.selected)

    __hash__ = None

    def __repr__(self):
        return f"Solution(f={self.profit}, W={self.weight}, items={self.items})"

    def can_add(self, p: int) -> bool:
        i = p - 1
        return (not self.selected[i] and self.conflict[i] == 0
                and self.weight + int(self.inst.weights[i]) <= self.inst.capacity)

    def can_swap(self, q: int, p: int) -> bool:
        """Feasibility of swap(q, p) on a feasible solution, in O(1)."""
        iq, ip = q - 1, p - 1
        inst = self.inst
        if not self.selected[iq] or self.selected[ip]:
            return False
        w = self.weight - int(inst.weights[iq]) + int(inst.weights[ip])
        return w <= inst.capacity and self.conflict[ip] - int(inst.adjacency[iq, ip]) == 0

    # -- in-place mutation; feasibility is the caller's business

    def add(self, p: int) -> None:
        i = p - 1
        if self.selected[i]:
            raise ValueError(f"item {p} is already selected")
        inst = self.inst
        self.selected[i] = True
        self.profit += int(inst.profits[i])
        self.weight += int(inst.weights[i])
        self.conflict[inst.nbr_idx[inst.nbr_ptr[i]:inst.nbr_ptr[i + 1]]] += 1

    def drop(self, q: int) -> None:
        i = q - 1
        if not self.selected[i]:
            raise ValueError(f"item {q} is not selected")
        inst = self.inst
        self.selected[i] = False
        self.profit -= int(inst.profits[i])
        self.weight -= int(inst.weights[i])
        self.conflict[inst.nbr_idx[inst.nbr_ptr[i]:inst.nbr_ptr[i + 1]]] -= 1

    def apply(self, mv: Move) -> "Solution":
        if mv.kind == ADD:
            self.add(mv.p)
        elif mv.kind == DROP:
            self.drop(mv.q)
        elif mv.kind == SWAP:
            if mv.q == mv.p:
                raise ValueError("swap needs two distinct items")
            if self.selected[mv.p - 1]:
                raise ValueError(f"item {mv.p} is already selected")
            self.drop(mv.q)
            self.add(mv.p)
        else:
            raise ValueError(f"unknown move kind {mv.kind!r}")
        return self

    def check_caches(self) -> bool:
        """Recompute every cache from scratch and compare (debug aid)."""
        fresh = Solution.from_mask(self.inst, self.selected)
        return (fresh.profit == self.profit and fresh.weight == self.weight
                and np.array_equal(fresh.conflict, self.conflict))


def objective(sol: Solution) -> int:
    return sol.profit


def is_feasible(inst: Instance, sol: Solution) -> bool:
    """Capacity and disjunctive constraints, checked from the raw instance data."""
    mask = sol.selected
    if int(inst.weights[mask].sum()) > inst.capacity:
        return False
    e = inst.edges
    if len(e) == 0:
        return True
    return not (mask[e[:, 0] - 1] & mask[e[:, 1] - 1]).any()


def apply_move(sol: Solution, mv: Move) -> Solution:
    """Return ``sol ⊕ mv`` as a new solution; ``sol`` is left untouched."""
    return sol.copy().apply(mv)


def hamming_distance(s1: Solution, s2: Solution) -> int:
    if s1.selected.size != s2.selected.size:
        raise ValueError("solutions belong to instances of different size")
    return int(np.count_nonzero(s1.selected != s2.selected))


# ---------------------------------------------------------------- certificates


def format_certificate(name: str, sol: Solution) -> str:
    """``name f W k`` on the first line, the selected items on the second."""
    items = sol.items
    return f"{name} {sol.profit} {sol.weight} {len(items)}\n{' '.join(map(str, items))}\n"


def parse_certificate(text: str) -> tuple[str, int, int, list[int]]:
    """Return ``(name, claimed_f, claimed_W, items)``."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty certificate")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError("certificate header must be 'name f W k'")
    name, f, w, k = head[0], int(head[1]), int(head[2]), int(head[3])
    items = [int(t) for ln in lines[1:] for t in ln.split()]
    if len(items) != k:
        raise ValueError(f"certificate announces {k} items but lists {len(items)}")
    return name, f, w, items
