"""Seeded batch runs and their CSV tables."""

from __future__ import annotations

import csv
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .instance import Instance, load_instance
from .solver import SolverConfig, solve, verify

log = logging.getLogger(__name__)

RUN_FIELDS = ("instance", "seed", "run", "f_best", "time_to_best_s", "generations")
AGG_FIELDS = ("instance", "runs", "f_best", "f_avg", "std", "t_avg_s")


class VerificationError(RuntimeError):
    pass


@dataclass
class RunRecord:
    instance: str
    seed: int
    run: int
    f_best: int
    time_to_best_s: float
    generations: int
    items: list[int] = field(default_factory=list, repr=False)

    def row(self) -> dict:
        return {"instance": self.instance, "seed": self.seed, "run": self.run, "f_best": self.f_best,
                "time_to_best_s": f"{self.time_to_best_s:.6f}", "generations": self.generations}


@dataclass
class Aggregate:
    instance: str
    runs: int
    f_best: int
    f_avg: float
    std: float
    t_avg_s: float

    def row(self) -> dict:
        return {"instance": self.instance, "runs": self.runs, "f_best": self.f_best,
                "f_avg": f"{self.f_avg:.6f}", "std": f"{self.std:.6f}", "t_avg_s": f"{self.t_avg_s:.6f}"}


def aggregate(records: Iterable[RunRecord]) -> list[Aggregate]:
    """Per-instance best, mean, population std of f_best and mean time-to-best."""
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.instance, []).append(r)
    out = []
    for name in sorted(groups):
        rs = groups[name]
        fs = [r.f_best for r in rs]
        out.append(Aggregate(name, len(rs), max(fs), statistics.fmean(fs), statistics.pstdev(fs),
                             statistics.fmean(r.time_to_best_s for r in rs)))
    return out


@dataclass
class BatchResult:
    records: list[RunRecord] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)

    def sorted_records(self) -> list[RunRecord]:
        return sorted(self.records, key=lambda r: (r.instance, r.run))

    @property
    def aggregates(self) -> list[Aggregate]:
        return aggregate(self.records)

    def by_instance(self) -> dict[str, Aggregate]:
        return {a.instance: a for a in self.aggregates}


def _solve_one(inst: Instance, config: SolverConfig, run: int) -> RunRecord:
    rep = solve(inst, config)
    if not verify(inst, rep.best.items, rep.f_best):
        raise VerificationError(f"{inst.name} run {run}: solver returned an invalid certificate")
    # rounded so aggregates recomputed from the CSV match exactly
    return RunRecord(inst.name, config.seed, run, rep.f_best, round(rep.time_to_best, 6), rep.generations,
                     rep.best.items)


def _load(source) -> Instance:
    return source if isinstance(source, Instance) else load_instance(source)


def _summary_path(path: Path) -> Path:
    return path.with_name(path.stem + ".summary.csv")


def run_batch(instances: Sequence, config: SolverConfig, runs: int = 1, jobs: int = 1,
              out: str | Path | None = None) -> BatchResult:
    """Solve every instance ``runs`` times with seeds ``config.seed + run``.

    Every result is re-verified against the instance before it is kept. With
    ``out``, per-run rows are appended as they finish (so a crash loses at most
    the running jobs) and the file is rewritten in canonical order at the end,
    together with the aggregate table.
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    result = BatchResult()
    loaded = []
    for src in instances:
        try:
            loaded.append(_load(src))
        except (OSError, ValueError) as exc:
            key = src.name if isinstance(src, Instance) else str(src)
            result.errors[key] = str(exc)
            log.error("skipping %s: %s", key, exc)

    journal = None
    if out is not None:
        out = Path(out)
        journal = out.open("w", newline="", encoding="utf-8")
        writer = csv.DictWriter(journal, fieldnames=RUN_FIELDS)
        writer.writeheader()
        journal.flush()

    def collect(rec: RunRecord):
        result.records.append(rec)
        if journal is not None:
            writer.writerow(rec.row())
            journal.flush()

    tasks = [(inst, replace(config, seed=config.seed + r), r) for inst in loaded for r in range(runs)]
    try:
        if jobs <= 1:
            for t in tasks:
                collect(_solve_one(*t))
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_solve_one, *t) for t in tasks]
                for fut in as_completed(futures):
                    collect(fut.result())
    finally:
        if journal is not None:
            journal.close()
    if out is not None:
        emit_csv(result, out)
    return result


def emit_csv(batch: BatchResult, path: str | Path, summary_path: str | Path | None = None) -> None:
    """Write the per-run table to ``path`` and the aggregate table next to it."""
    path = Path(path)
    summary_path = Path(summary_path) if summary_path else _summary_path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=RUN_FIELDS)
        w.writeheader()
        for rec in batch.sorted_records():
            w.writerow(rec.row())
    with summary_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=AGG_FIELDS)
        w.writeheader()
        for agg in batch.aggregates:
            w.writerow(agg.row())


def read_runs_csv(path: str | Path) -> list[RunRecord]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [RunRecord(r["instance"], int(r["seed"]), int(r["run"]), int(r["f_best"]),
                          float(r["time_to_best_s"]), int(r["generations"])) for r in csv.DictReader(fh)]


def read_summary_csv(path: str | Path) -> list[Aggregate]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [Aggregate(r["instance"], int(r["runs"]), int(r["f_best"]), float(r["f_avg"]), float(r["std"]),
                          float(r["t_avg_s"])) for r in csv.DictReader(fh)]
