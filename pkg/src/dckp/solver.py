"""The memetic main loop: initialise, then repeat crossover -> threshold search ->
best update -> pool update until the time or generation budget runs out."""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .evolution import DEFAULT_BETA, crossover, init_population, update_pool
from .hashing import DEFAULT_LENGTH, ProhibitionStore
from .instance import Instance
from .solution import Solution
from .threshold import ACCEPTANCE, POLICIES, TspParams, iter_max, run_tsp

log = logging.getLogger(__name__)

# ablation presets
VARIANTS = {
    "full": {},
    "no-prohibition": {"op_enabled": False},
    "first-improvement": {"acceptance": "first"},
    "best-improvement": {"acceptance": "best"},
}

ACCEPTANCE_ALIASES = {"threshold": "threshold", "first": "first", "first_improve": "first",
                      "best": "best", "best_improve": "best"}


@dataclass
class SolverConfig:
    """Run settings.

    ``max_generations`` switches to a generation budget (the time limit is then
    ignored), which makes a run reproducible bit for bit. ``strict_time`` checks
    the clock inside threshold searches instead of once per generation.
    """

    time_limit: float = 10.0
    seed: int = 0
    threshold_policy: str = "set1"
    acceptance: str = "threshold"
    op_enabled: bool = True
    global_op_store: bool = False
    absolute_threshold: bool = False
    max_generations: int | None = None
    strict_time: bool = False
    beta: float = DEFAULT_BETA
    hash_length: int = DEFAULT_LENGTH
    trace: bool = False
    # cap on per-iteration threshold-search rows kept in the report (0 = none)
    trace_rows: int = 0

    def __post_init__(self):
        if self.max_generations is None and not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if self.max_generations is not None and self.max_generations < 0:
            raise ValueError("max_generations must be non-negative")
        if self.threshold_policy not in POLICIES:
            raise ValueError(f"unknown threshold policy {self.threshold_policy!r}")
        if self.acceptance not in ACCEPTANCE_ALIASES:
            raise ValueError(f"unknown acceptance policy {self.acceptance!r}")
        self.acceptance = ACCEPTANCE_ALIASES[self.acceptance]
        assert self.acceptance in ACCEPTANCE


@dataclass
class SolveReport:
    instance: str
    best: Solution
    f_best: int
    time_to_best: float
    generations: int
    elapsed: float
    config: SolverConfig
    # (generation, seconds, f_best) every time the overall best improved
    trajectory: list[tuple[int, float, int]] = field(default_factory=list)
    # (generation, seconds, f of S_b, f_best) once per generation when config.trace is on
    generation_log: list[tuple[int, float, int, int]] = field(default_factory=list)
    # per-iteration rows: generation followed by threshold.TRACE_COLUMNS
    tsp_trace: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "f_best": self.f_best,
            "weight": self.best.weight,
            "items": self.best.items,
            "time_to_best_s": round(self.time_to_best, 6),
            "generations": self.generations,
            "elapsed_s": round(self.elapsed, 6),
            "seed": self.config.seed,
            "config": asdict(self.config),
            "trajectory": [list(t) for t in self.trajectory],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent generators for each source of randomness, split from one seed."""
    names = ("init", "parents", "crossover", "tsp")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {k: np.random.default_rng(s) for k, s in zip(names, children)}


def solve(inst: Instance, config: SolverConfig | None = None) -> SolveReport:
    config = config or SolverConfig()
    start = time.perf_counter()
    rng = _streams(config.seed)
    budget_by_time = config.max_generations is None
    deadline = start + config.time_limit if budget_by_time else None
    tsp_deadline = deadline if config.strict_time else None

    store = ProhibitionStore(config.hash_length if config.op_enabled else 64)
    base = TspParams(iter_max=iter_max(inst.n, "init"), policy=config.threshold_policy,
                     acceptance=config.acceptance, op_enabled=config.op_enabled,
                     absolute_threshold=config.absolute_threshold)
    pop = init_population(inst, rng["init"], tsp_params=base, store=store, tsp_rng=rng["tsp"],
                          deadline=tsp_deadline)
    pop.beta = config.beta
    best = pop.best().copy()
    t_best = time.perf_counter() - start
    trajectory = [(0, t_best, best.profit)]
    gen_log = []
    main_iters = iter_max(inst.n, "main")
    generations = 0
    traces = []
    trace_left = config.trace_rows

    def more():
        if budget_by_time:
            return time.perf_counter() - start <= config.time_limit
        return generations < config.max_generations

    while more():
        si, sj = pop.pick_parents(rng["parents"])
        child = crossover(si, sj, rng["crossover"])
        params = TspParams(iter_max=main_iters, policy=config.threshold_policy, acceptance=config.acceptance,
                           op_enabled=config.op_enabled, absolute_threshold=config.absolute_threshold,
                           seed=int(rng["tsp"].integers(0, 2**32)))
        result = run_tsp(inst, child, params, store, reset_store=not config.global_op_store,
                         deadline=tsp_deadline, trace=trace_left)
        sb = result.best
        generations += 1
        if trace_left:
            rows = result.trace
            traces.append(np.column_stack([np.full(len(rows), generations, dtype=np.int64), rows]))
            trace_left -= len(rows)
        now = time.perf_counter() - start
        if sb.profit > best.profit:
            best = sb.copy()
            t_best = now
            trajectory.append((generations, now, best.profit))
            log.debug("generation %d: new best %d at %.3fs", generations, best.profit, now)
        if config.trace:
            gen_log.append((generations, now, sb.profit, best.profit))
        update_pool(pop, sb)

    elapsed = time.perf_counter() - start
    return SolveReport(instance=inst.name, best=best, f_best=best.profit, time_to_best=t_best,
                       generations=generations, elapsed=elapsed, config=config,
                       trajectory=trajectory, generation_log=gen_log,
                       tsp_trace=np.concatenate(traces) if traces else None)


def verify(inst: Instance, items, claimed_f: int) -> bool:
    """Independent certificate check from the raw instance data.

    ``items`` is a :class:`Solution` or an iterable of 1-based item indices;
    no cached value of a solution is trusted.
    """
    if isinstance(items, Solution):
        items = items.items
    chosen = [int(i) for i in items]
    if len(set(chosen)) != len(chosen):
        return False
    if any(i < 1 or i > inst.n for i in chosen):
        return False
    profits = inst.profits.tolist()
    weights = inst.weights.tolist()
    if sum(weights[i - 1] for i in chosen) > inst.capacity:
        return False
    picked = set(chosen)
    for i, j in inst.edges.tolist():
        if i in picked and j in picked:
            return False
    return sum(profits[i - 1] for i in chosen) == int(claimed_f)
