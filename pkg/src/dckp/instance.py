"""DCKP instances: the canonical text format, validation and synthetic generation.

The canonical file is plain text::

    n m C
    p_1 w_1
    ...
    p_n w_n
    i j        (m lines, 1 <= i < j <= n, sorted)

Lines starting with ``#`` are ignored anywhere in the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np


class InstanceFormatError(ValueError):
    """Raised when an instance file is malformed. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Instance:
    """An immutable DCKP instance.

    Items are numbered ``1..n``; the numpy arrays are indexed ``i - 1``.

    Parameters
    ----------
    profits, weights : array-like of int
        Positive integer profits and weights.
    capacity : int
        Knapsack capacity.
    edges : iterable of (i, j)
        Conflict pairs with 1-based item indices, in any order/orientation.
    name : str
        Identifier echoed into reports and certificates.
    """

    def __init__(self, profits, weights, capacity: int, edges: Iterable = (), name: str = "instance"):
        p = np.asarray(profits, dtype=np.int64).ravel()
        w = np.asarray(weights, dtype=np.int64).ravel()
        n = p.size
        if n < 1:
            raise ValueError("instance needs at least one item")
        if w.size != n:
            raise ValueError(f"{n} profits but {w.size} weights")
        if int(capacity) < 1:
            raise ValueError("capacity must be positive")
        if (p <= 0).any():
            raise ValueError(f"non-positive profit for item {int(np.argmax(p <= 0)) + 1}")
        if (w <= 0).any():
            raise ValueError(f"non-positive weight for item {int(np.argmax(w <= 0)) + 1}")

        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        e = e.reshape(-1, 2)
        if e.size:
            if e.min() < 1 or e.max() > n:
                raise ValueError("edge index out of range")
            if (e[:, 0] == e[:, 1]).any():
                raise ValueError("self-loop in conflict graph")
            e = np.sort(e, axis=1)
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            if (np.diff(e, axis=0) == 0).all(axis=1).any():
                raise ValueError("duplicate edge in conflict graph")

        adj = np.zeros((n, n), dtype=np.bool_)
        adj[e[:, 0] - 1, e[:, 1] - 1] = True
        adj[e[:, 1] - 1, e[:, 0] - 1] = True

        # CSR neighbour lists (0-based) for incremental conflict-count updates
        degree = adj.sum(axis=1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        indices = np.nonzero(adj)[1].astype(np.int64)

        for arr in (p, w, e, adj, indptr, indices):
            arr.flags.writeable = False
        self.name = name
        self.n = n
        self.capacity = int(capacity)
        self.profits = p
        self.weights = w
        self.edges = e
        self.adjacency = adj
        self.nbr_ptr = indptr
        self.nbr_idx = indices

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, i: int) -> np.ndarray:
        """1-based neighbours of item ``i``."""
        return self.nbr_idx[self.nbr_ptr[i - 1]:self.nbr_ptr[i]] + 1

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        # structural equality; the name is metadata
        return (
            self.capacity == other.capacity
            and np.array_equal(self.profits, other.profits)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.edges, other.edges)
        )

    __hash__ = None

    def __repr__(self):
        return f"Instance(name={self.name!r}, n={self.n}, m={self.m}, C={self.capacity})"


def density(inst: Instance) -> float:
    """Conflict-graph density ``2m / (n (n - 1))``."""
    if inst.n < 2:
        raise ValueError("density is undefined for fewer than two items")
    return 2.0 * inst.m / (inst.n * (inst.n - 1))


# --------------------------------------------------------------------------- io


def parse_instance(text: str | TextIO, name: str = "instance") -> Instance:
    if not isinstance(text, str):
        text = text.read()
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        rows.append((lineno, line.split()))
    if not rows:
        raise InstanceFormatError("empty instance file", 1)

    def ints(lineno, toks, k, what):
        if len(toks) != k:
            raise InstanceFormatError(f"expected {k} integers for {what}, got {len(toks)}", lineno)
        try:
            return [int(t) for t in toks]
        except ValueError:
            raise InstanceFormatError(f"non-integer token in {what}", lineno) from None

    lineno, toks = rows[0]
    n, m, cap = ints(lineno, toks, 3, "header 'n m C'")
    if n < 1:
        raise InstanceFormatError("n must be positive", lineno)
    if m < 0 or m > n * (n - 1) // 2:
        raise InstanceFormatError(f"edge count {m} impossible for n={n}", lineno)
    if cap < 1:
        raise InstanceFormatError("capacity must be positive", lineno)
    if len(rows) != 1 + n + m:
        last = rows[-1][0]
        raise InstanceFormatError(f"expected {n} item lines and {m} edge lines, got {len(rows) - 1} data lines", last)

    profits, weights = [], []
    for lineno, toks in rows[1:n + 1]:
        pi, wi = ints(lineno, toks, 2, "item 'p w'")
        if pi <= 0:
            raise InstanceFormatError("non-positive profit", lineno)
        if wi <= 0:
            raise InstanceFormatError("non-positive weight", lineno)
        profits.append(pi)
        weights.append(wi)

    edges = []
    seen = set()
    for lineno, toks in rows[n + 1:]:
        i, j = ints(lineno, toks, 2, "edge 'i j'")
        if not (1 <= i <= n and 1 <= j <= n):
            raise InstanceFormatError(f"edge index out of range 1..{n}", lineno)
        if i == j:
            raise InstanceFormatError(f"self-loop on item {i}", lineno)
        key = (min(i, j), max(i, j))
        if key in seen:
            raise InstanceFormatError(f"duplicate edge {key[0]} {key[1]}", lineno)
        seen.add(key)
        edges.append(key)

    return Instance(profits, weights, cap, np.array(edges, dtype=np.int64).reshape(-1, 2), name=name)


def serialize_instance(inst: Instance) -> str:
    lines = [f"{inst.n} {inst.m} {inst.capacity}"]
    lines += [f"{p} {w}" for p, w in zip(inst.profits.tolist(), inst.weights.tolist())]
    lines += [f"{i} {j}" for i, j in inst.edges.tolist()]
    return "\n".join(lines) + "\n"


def load_instance(path, name: str | None = None) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), name=name or path.stem)


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(serialize_instance(inst), encoding="utf-8")


# -------------------------------------------------------------------- generator


@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for a random DCKP instance.

    Weights are uniform integers in ``weight_range``. With ``profit_rule="shifted"``
    every profit is ``w_i + profit_shift``; with ``"uniform"`` profits are drawn
    independently from ``profit_range``. The conflict graph is a uniform G(n, m)
    graph with exactly ``m = round(density * n (n - 1) / 2)`` edges.
    """

    n: int
    capacity: int
    density: float
    weight_range: tuple[int, int] = (1, 100)
    profit_rule: str = "shifted"
    profit_shift: int = 10
    profit_range: tuple[int, int] = (1, 100)
    seed: int = 0
    name: str | None = None
    note: str = field(default="", compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.capacity < 1:
            raise ValueError("capacity must be positive")
        if not 0.0 < self.density < 1.0:
            raise ValueError("density must lie in (0, 1)")
        lo, hi = self.weight_range
        if not 1 <= lo <= hi:
            raise ValueError("weight range must satisfy 1 <= lo <= hi")
        if self.profit_rule not in ("shifted", "uniform"):
            raise ValueError(f"unknown profit rule {self.profit_rule!r}")
        if self.profit_rule == "uniform" and not 1 <= self.profit_range[0] <= self.profit_range[1]:
            raise ValueError("profit range must satisfy 1 <= lo <= hi")
        if self.profit_rule == "shifted" and self.profit_shift < 0:
            raise ValueError("profit shift must be non-negative")

    @property
    def edge_count(self) -> int:
        return round(self.density * self.n * (self.n - 1) / 2)


def generate_instance(spec: GeneratorSpec) -> Instance:
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    w = rng.integers(spec.weight_range[0], spec.weight_range[1], size=n, endpoint=True)
    if spec.profit_rule == "shifted":
        p = w + spec.profit_shift
    else:
        p = rng.integers(spec.profit_range[0], spec.profit_range[1], size=n, endpoint=True)
    total = n * (n - 1) // 2
    m = spec.edge_count
    if m > total:
        raise ValueError(f"{m} edges exceed the complete-graph bound {total}")
    codes = np.sort(rng.choice(total, size=m, replace=False)) if m else np.empty(0, np.int64)
    rows, cols = np.triu_indices(n, 1)
    edges = np.column_stack([rows[codes], cols[codes]]) + 1
    name = spec.name or f"gen_n{n}_d{spec.density:g}_s{spec.seed}"
    return Instance(p, w, spec.capacity, edges, name=name)


# published characteristics of the 20 Set-I classes: (n, C, density, max weight)
SET1_CLASSES = {
    1: (500, 1800, 0.10), 2: (500, 1800, 0.20), 3: (500, 1800, 0.30), 4: (500, 1800, 0.40),
    5: (1000, 1800, 0.05), 6: (1000, 2000, 0.06), 7: (1000, 2000, 0.07), 8: (1000, 2000, 0.08),
    9: (1000, 2000, 0.09), 10: (1000, 2000, 0.10),
    11: (1500, 4000, 0.04), 12: (1500, 4000, 0.08), 13: (1500, 4000, 0.12), 14: (1500, 4000, 0.16),
    15: (1500, 4000, 0.20), 16: (2000, 4000, 0.04), 17: (2000, 4000, 0.08), 18: (2000, 4000, 0.12),
    19: (2000, 4000, 0.16), 20: (2000, 4000, 0.20),
}


def set1_spec(cls: int, seed: int = 0) -> GeneratorSpec:
    """Generator recipe with the published characteristics of Set-I class ``cls`` (1..20).

    Produces look-alike instances, not the benchmark files themselves.
    """
    n, cap, eta = SET1_CLASSES[cls]
    wmax = 100 if cls <= 10 else 400
    return GeneratorSpec(n=n, capacity=cap, density=eta, weight_range=(1, wmax),
                         profit_rule="shifted", profit_shift=10, seed=seed,
                         name=f"{cls}I-gen-s{seed}", note="set1 look-alike")


# Set-II classes only publish ranges; these presets are approximations.
SET2_CLASSES = {
    "C1": ("shifted", 1), "C3": ("shifted", 3), "C10": ("shifted", 10), "C15": ("shifted", 15),
    "R1": ("uniform", 1), "R3": ("uniform", 3), "R10": ("uniform", 10), "R15": ("uniform", 15),
    "SC": ("shifted", None), "SR": ("uniform", None),
}


def set2_spec(cls: str, n: int, density: float, seed: int = 0) -> GeneratorSpec:
    """Approximate Set-II style recipe.

    Weights are uniform in [1, 100]; correlated classes use ``p = w + 10`` and
    random classes draw ``p`` uniformly in [1, 100]. Capacity for the dense classes
    scales with the class multiplier (C1 -> 150..1000, C15 -> 15000) and for the
    sparse classes with ``2 n``. Distributions are guesses; the metadata note says so.
    """
    rule, mult = SET2_CLASSES[cls]
    if mult is None:
        cap = 2 * n
    elif mult == 15:
        cap = 15000
    else:
        cap = int(mult * max(150, round(n)))
    return GeneratorSpec(n=n, capacity=cap, density=density, weight_range=(1, 100),
                         profit_rule=rule, profit_shift=10, profit_range=(1, 100), seed=seed,
                         name=f"{cls}-gen-n{n}-d{density:g}-s{seed}",
                         note="set2 approximation: distributions not published")
