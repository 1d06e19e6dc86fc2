"""Command-line interface: ``dckp {generate,solve,batch,oracle,verify,profile,stats}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import bench, exact, instance, solution, solver, stats
from .threshold import TRACE_COLUMNS

log = logging.getLogger("dckp")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--time-limit", type=float, default=10.0, help="seconds per run (default 10)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=("set1", "set2"), default="set1", help="threshold rule")
    p.add_argument("--acceptance", choices=("threshold", "first", "best"), default=None)
    p.add_argument("--variant", choices=sorted(solver.VARIANTS), default=None,
                   help="ablation preset; explicit flags override it")
    p.add_argument("--no-op-store", action="store_true", help="disable solution prohibition")
    p.add_argument("--global-op-store", action="store_true",
                   help="keep the hash vectors across threshold-search calls")
    p.add_argument("--absolute-threshold", action="store_true",
                   help="set2 only: use MinP + rand(20) as the threshold itself")
    p.add_argument("--budget-generations", type=int, default=None, metavar="K",
                   help="stop after K generations instead of on time (reproducible)")
    p.add_argument("--strict-time", action="store_true", help="check the clock inside local searches")


def _config(args) -> solver.SolverConfig:
    kw = dict(solver.VARIANTS[args.variant]) if args.variant else {}
    if args.acceptance:
        kw["acceptance"] = args.acceptance
    if args.no_op_store:
        kw["op_enabled"] = False
    return solver.SolverConfig(time_limit=args.time_limit, seed=args.seed, threshold_policy=args.policy,
                               global_op_store=args.global_op_store, absolute_threshold=args.absolute_threshold,
                               max_generations=args.budget_generations, strict_time=args.strict_time,
                               **kw)


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    if args.preset:
        family, _, cls = args.preset.partition(":")
        if family == "set1":
            spec = instance.set1_spec(int(cls), seed=args.seed)
        elif family == "set2":
            if args.n is None or args.density is None:
                raise SystemExit("set2 presets need --n and --density")
            spec = instance.set2_spec(cls, args.n, args.density, seed=args.seed)
        else:
            raise SystemExit(f"unknown preset family {family!r}")
    else:
        if args.n is None or args.capacity is None or args.density is None:
            raise SystemExit("generate needs --n, --capacity and --density (or --preset)")
        rule = "uniform" if args.profit_range else "shifted"
        spec = instance.GeneratorSpec(
            n=args.n, capacity=args.capacity, density=args.density, weight_range=tuple(args.weights),
            profit_rule=rule, profit_shift=args.profit_shift,
            profit_range=tuple(args.profit_range) if args.profit_range else (1, 100), seed=args.seed,
            name=args.name)
    inst = instance.generate_instance(spec)
    header = f"# {spec.name or inst.name} seed={spec.seed} density={spec.density:g}"
    if spec.note:
        header += f" ({spec.note})"
    _write(header + "\n" + instance.serialize_instance(inst), args.out)
    return 0


def cmd_solve(args) -> int:
    inst = instance.load_instance(args.instance)
    config = _config(args)
    if args.trace:
        config.trace = True
    if args.tsp_trace:
        config.trace_rows = args.tsp_trace_rows
    rep = solver.solve(inst, config)
    if not solver.verify(inst, rep.best.items, rep.f_best):
        log.error("solver produced an invalid certificate")
        return 2
    if args.cert:
        Path(args.cert).write_text(solution.format_certificate(inst.name, rep.best), encoding="utf-8")
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(("generation", "elapsed_s", "f_tsp_best", "f_best"))
            w.writerows(rep.generation_log)
    if args.tsp_trace:
        with open(args.tsp_trace, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(("generation",) + TRACE_COLUMNS)
            if rep.tsp_trace is not None:
                w.writerows(rep.tsp_trace.tolist())
    _write(rep.to_json(indent=2) + "\n", args.out)
    return 0


def cmd_batch(args) -> int:
    paths = list(args.instances) + list(args.instance or [])
    if not paths:
        raise SystemExit("batch needs at least one instance")
    config = _config(args)
    out = args.out or "batch.csv"
    res = bench.run_batch(paths, config, runs=args.runs, jobs=args.jobs, out=out)
    for agg in res.aggregates:
        print(f"{agg.instance}: f_best={agg.f_best} f_avg={agg.f_avg:.2f} std={agg.std:.2f} "
              f"t_avg={agg.t_avg_s:.2f}s")
    for name, err in res.errors.items():
        print(f"{name}: FAILED ({err})", file=sys.stderr)
    return 1 if res.errors else 0


def cmd_oracle(args) -> int:
    path = args.instance_path or args.instance
    if not path:
        raise SystemExit("oracle needs an instance")
    inst = instance.load_instance(path)
    res = exact.solve_exact(inst, node_budget=args.node_budget)
    sol = solution.Solution(inst, res.items)
    print(f"# {res.status} optimum={res.optimum} nodes={res.nodes} method={res.method}")
    _write(solution.format_certificate(inst.name, sol), args.out)
    return 0 if res.proven else 3


def cmd_verify(args) -> int:
    inst = instance.load_instance(args.instance)
    name, f, w, items = solution.parse_certificate(Path(args.cert).read_text(encoding="utf-8"))
    ok = solver.verify(inst, items, f)
    if ok and w != sum(int(inst.weights[i - 1]) for i in items):
        ok = False
    print(f"{name}: {'OK' if ok else 'INVALID'} f={f}")
    return 0 if ok else 1


def _read_table(files: list[str], labels: list[str] | None, column: str) -> tuple[dict, list[str]]:
    """Load ``table[instance][solver]`` from batch summaries or one wide CSV."""
    table: dict[str, dict[str, float]] = {}
    if len(files) == 1:
        with open(files[0], newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            cols = reader.fieldnames or []
            if "runs" not in cols:
                solvers = [c for c in cols if c != "instance"]
                for row in reader:
                    table[row["instance"]] = {s: float(row[s]) for s in solvers}
                return table, solvers
    labels = labels or [Path(f).name.split(".")[0] for f in files]
    if len(labels) != len(files):
        raise SystemExit("--labels must match the number of files")
    for label, f in zip(labels, files):
        for agg in bench.read_summary_csv(f):
            table.setdefault(agg.instance, {})[label] = float(getattr(agg, column))
    return table, labels


def cmd_profile(args) -> int:
    table, solvers = _read_table(args.files, args.labels, args.column)
    curves = stats.performance_profiles(table, solvers, ratio_to_worst=args.ratio_to_worst)
    lines = ["solver,tau,rho"]
    for s, c in curves.items():
        lines += [f"{s},{t:.10g},{r:.10g}" for t, r in c.points()]
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_stats(args) -> int:
    table, solvers = _read_table(args.files, args.labels, args.column)
    if len(solvers) < 2:
        raise SystemExit("stats needs two solvers")
    a, b = (args.a or solvers[0]), (args.b or solvers[1])
    inst_names = sorted(table)
    res = stats.wilcoxon_signed_rank(a=[table[i][a] for i in inst_names], b=[table[i][b] for i in inst_names])
    wins = sum(table[i][a] > table[i][b] for i in inst_names)
    ties = sum(table[i][a] == table[i][b] for i in inst_names)
    losses = len(inst_names) - wins - ties
    out = {"a": a, "b": b, "wins": wins, "ties": ties, "losses": losses, "status": res.status,
           "statistic": res.statistic, "p_value": res.p_value, "n": res.n, "method": res.method,
           "favors": res.favors}
    print(json.dumps(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dckp", description="Disjunctively constrained knapsack toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--preset", help="set1:<1..20> or set2:<C1|C3|C10|C15|R1|R3|R10|R15|SC|SR>")
    g.add_argument("--n", type=int)
    g.add_argument("--capacity", type=int)
    g.add_argument("--density", type=float)
    g.add_argument("--weights", type=int, nargs=2, default=(1, 100), metavar=("LO", "HI"))
    g.add_argument("--profit-shift", type=int, default=10, help="p = w + K (default)")
    g.add_argument("--profit-range", type=int, nargs=2, metavar=("LO", "HI"), help="independent uniform profits")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--name")
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run the memetic solver once")
    s.add_argument("--instance", required=True)
    _add_solver_flags(s)
    s.add_argument("--cert", help="write the solution certificate here")
    s.add_argument("--trace", help="write a per-generation CSV log here")
    s.add_argument("--tsp-trace", help="write per-iteration threshold-search rows (CSV) here")
    s.add_argument("--tsp-trace-rows", type=int, default=1_000_000, help="row cap for --tsp-trace")
    s.add_argument("--out", help="write the JSON report here instead of stdout")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("batch", help="seeded runs over many instances")
    b.add_argument("instances", nargs="*")
    b.add_argument("--instance", action="append")
    _add_solver_flags(b)
    b.add_argument("--runs", type=int, default=20)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", help="per-run CSV (the summary goes to <stem>.summary.csv)")
    b.set_defaults(func=cmd_batch)

    o = sub.add_parser("oracle", help="exact optimum for small instances (n <= 40)")
    o.add_argument("instance_path", nargs="?")
    o.add_argument("--instance")
    o.add_argument("--node-budget", type=int, default=10_000_000)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)

    v = sub.add_parser("verify", help="check a solution certificate")
    v.add_argument("--instance", required=True)
    v.add_argument("--cert", required=True)
    v.set_defaults(func=cmd_verify)

    for name, func, helptext in (("profile", cmd_profile, "performance-profile curves"),
                                 ("stats", cmd_stats, "Wilcoxon signed-rank comparison")):
        q = sub.add_parser(name, help=helptext)
        q.add_argument("files", nargs="+", help="batch summary CSVs, or one wide CSV (instance,<solver>...)")
        q.add_argument("--labels", nargs="+")
        q.add_argument("--column", choices=("f_best", "f_avg"), default="f_best")
        q.add_argument("--out")
        if name == "profile":
            q.add_argument("--ratio-to-worst", action="store_true",
                           help="ratio f / min f instead of max f / f")
        else:
            q.add_argument("--a")
            q.add_argument("--b")
        q.set_defaults(func=func)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
