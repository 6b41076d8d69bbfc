"""Command-line surface: preprocess, query, bench, stats.

Node ids on this surface refer to the cleaned graph: the largest
strongly connected component of the input file, with ids compacted in
ascending order of the file's (0-based) ids.  Exit codes: 0 ok, 1
domain error (bad files, failed gate), 2 usage error.

The seed flags default to the TOPOCORE_SEED environment variable when
it is set.
"""

from __future__ import annotations

import argparse
import os
import sys

from topocore import bench as bench_mod
from topocore import fileio, synth
from topocore.core import VARIANTS, run_pipeline
from topocore.costs import INF, CostTable, Objective, Op
from topocore.graph import (
    Permutation,
    apply_permutation,
    build_graph_arrays,
    cleanup,
    degree_histogram,
    dfs_preorder,
    random_order,
)
from topocore.search import bilevel_query

ORDERS = ("input", "random", "dfs")


class UsageError(ValueError):
    """Bad command usage beyond what argparse can check (exit 2)."""


def _default_seed() -> int:
    return int(os.environ.get("TOPOCORE_SEED", "0"))


def _load_graph(gr_path, co_path, cost_path):
    """Graph carrying the cost table's rows; files pair in arc order."""
    n, tail, head, _ = fileio.parse_dimacs_arcs(gr_path)
    table = fileio.read_cost_file(cost_path)
    if table.arc_count != len(tail):
        raise ValueError(
            f"cost file has {table.arc_count} rows, graph has {len(tail)} arcs"
        )
    coords = fileio.parse_dimacs_coords(co_path, n) if co_path else None
    graph = build_graph_arrays(n, tail, head, table.rows, coords=coords)
    return graph, table.spec


def _order_permutation(graph, order, seed):
    if order == "input":
        return Permutation.identity(graph.node_count)
    if order == "random":
        return random_order(graph, seed)
    if order == "dfs":
        return dfs_preorder(graph)
    raise UsageError(f"unknown order {order!r}")


def _pct(part, whole):
    return f"{100.0 * part / whole:.1f}%" if whole else "n/a"


def cmd_preprocess(args) -> int:
    graph, spec = _load_graph(args.graph, args.co, args.costs)
    clean = cleanup(graph)
    print(f"input: {graph.node_count} nodes, {graph.arc_count} arcs")
    print(f"cleaned: {clean.node_count} nodes, {clean.arc_count} arcs "
          f"({_pct(clean.node_count, graph.node_count)} of nodes)")
    order_perm = _order_permutation(clean, args.order, args.seed)
    ordered = apply_permutation(clean, order_perm)
    prep = run_pipeline(ordered, spec, args.variant, order_perm=order_perm,
                        order_name=args.order)
    st = prep.stats
    n = st.input_nodes
    print(f"largest two-connected piece: {st.core_nodes_step1} nodes "
          f"({_pct(st.core_nodes_step1, n)}), {st.core_arcs_step1} arcs")
    avg = st.chain_arcs / st.chain_count if st.chain_count else 0.0
    print(f"after chain bypass: {st.core_nodes_step2} nodes "
          f"({_pct(st.core_nodes_step2, n)}), {st.core_arcs_step2} arcs; "
          f"{st.chain_count} chains, {avg:.1f} arcs per chain on average, "
          f"{st.chain_rounds} rounds, {st.cycle_count} collapsed cycles")
    if args.variant == "topocore-is":
        print(f"after degree-3 contraction: {st.core_nodes_final} nodes "
              f"({_pct(st.core_nodes_final, n)}), {st.core_arcs_final} arcs; "
              f"contracted set size {st.is_set_size}")
    print(f"core arcs with three-arc endpoints remaining: {st.core_deg3_final}")
    print(f"shortcuts: {prep.shortcut_count} "
          f"(unpack table {len(prep.sc_unpack_refs)} refs)")
    if st.saturated_shortcuts:
        print(f"warning: {st.saturated_shortcuts} shortcut costs clipped",
              file=sys.stderr)
    timing = "  ".join(f"{k} {v:.2f}s" for k, v in st.timings.items())
    print(f"timings: {timing}")
    fileio.save_prep(prep, args.out)
    print(f"wrote {args.out}")
    return 0


def _build_objective(prep, args) -> Objective:
    spec = prep.spec
    n_add = len(spec.positions(Op.ADD))
    n_min = len(spec.positions(Op.MIN))
    n_and = len(spec.positions(Op.AND))
    weights = args.weights if args.weights is not None else [0] * n_add
    vehicle = args.vehicle if args.vehicle is not None else [0] * n_min
    bits = args.bits if args.bits is not None else [0] * n_and
    if len(weights) != n_add:
        raise UsageError(f"--weights needs {n_add} values for this prep, got {len(weights)}")
    if len(vehicle) != n_min:
        raise UsageError(f"--vehicle needs {n_min} values for this prep, got {len(vehicle)}")
    if len(bits) != n_and:
        raise UsageError(f"--bits needs {n_and} values for this prep, got {len(bits)}")
    return Objective(tuple(weights), tuple(vehicle), tuple(bits))


def cmd_query(args) -> int:
    prep = fileio.load_prep(args.prep)
    obj = _build_objective(prep, args)
    n = prep.node_count
    for name, v in (("source", args.source), ("target", args.target)):
        if not 0 <= v < n:
            raise UsageError(f"{name} {v} out of range 0..{n - 1}")
    s = prep.search_id(args.source)
    t = prep.search_id(args.target)
    res = bilevel_query(prep, s, t, obj, want_path=args.path)
    print("inf" if res.distance == INF else int(res.distance))
    if args.path and res.distance != INF:
        back = prep.order_perm.inverse().new_id
        nodes = [args.source]
        for a in res.path or []:
            nodes.append(int(back[prep.input_head[a]]))
        print(" ".join(str(v) for v in nodes))
    return 0


def cmd_bench(args) -> int:
    graph, spec = _load_graph(args.graph, args.co, args.costs)
    clean = cleanup(graph)
    prep = None
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    if "bilevel" in engines:
        if args.prep is None:
            raise UsageError("--prep is required when the engine list has bilevel")
        prep = fileio.load_prep(args.prep)
    # workload objectives are shaped by the mode, not by the table
    want = {"basic": (8, 0, 0), "generalized": (4, 4, 0)}[args.mode]
    have = tuple(len(spec.positions(op)) for op in (Op.ADD, Op.MIN, Op.AND))
    if have != want:
        raise UsageError(
            f"mode {args.mode} needs {want[0]} add / {want[1]} min / "
            f"{want[2]} and components, cost table has "
            f"{have[0]}/{have[1]}/{have[2]}"
        )
    workload = synth.generate_workload(clean, args.queries, args.mode, args.seed)

    if args.pad_costs is not None:
        k0 = spec.k
        table = bench_mod.pad_cost_table(
            CostTable(spec, clean.costs), args.pad_costs, args.seed,
        )
        clean = clean.with_costs(table.rows)
        spec = table.spec
        workload = bench_mod.pad_workload(workload, k0, args.pad_costs, args.seed)
        if prep is not None:
            ordered = apply_permutation(clean, prep.order_perm)
            prep = run_pipeline(ordered, spec, prep.variant,
                                order_perm=prep.order_perm,
                                order_name=prep.order_name)

    try:
        report, _ = bench_mod.run_benchmark(
            clean, spec, workload, engines, prep=prep, workers=args.workers,
        )
    except bench_mod.BenchMismatch as e:
        print(f"correctness gate failed: {e}", file=sys.stderr)
        return 1
    _print_report(report)
    if args.tsv:
        if args.tsv == "-":
            sys.stdout.write(report.to_tsv())
        else:
            with open(args.tsv, "w", encoding="ascii") as f:
                f.write(report.to_tsv())
            print(f"wrote {args.tsv}")
    return 0


def _print_report(report) -> None:
    if not report.rows:
        print("no queries, nothing to report")
        return
    header = f"{'engine':<10} {'order':<7} {'strat':<6} {'queries':>7} " \
             f"{'mean pops':>12} {'mean relaxed':>13} {'ms/query':>9} {'speedup':>8}"
    print(header)
    for r in report.rows:
        sp = f"{r.speedup:.2f}" if r.speedup is not None else "-"
        print(f"{r.engine:<10} {r.order:<7} {r.strategy:<6} {r.queries:>7} "
              f"{r.mean_pops:>12.1f} {r.mean_relaxed:>13.1f} "
              f"{r.mean_time_ms:>9.3f} {sp:>8}")


def cmd_stats(args) -> int:
    graph = fileio.parse_dimacs(args.graph)
    hist = degree_histogram(graph)
    n = graph.node_count
    print(f"{n} nodes, {graph.arc_count} arcs")
    buckets = {d: hist.get(d, 0) for d in (0, 1, 2, 3, 4)}
    buckets["5+"] = sum(c for d, c in hist.items() if d >= 5)
    for d, c in buckets.items():
        if d == 0 and c == 0:
            continue
        print(f"degree {d}: {_pct(c, n)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="topocore",
        description="Topology-only core preprocessing and exact per-query-objective "
                    "shortest paths.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("preprocess", help="build and save a prep container")
    pp.add_argument("graph", help="DIMACS .gr file")
    pp.add_argument("costs", help="cost table file (text or binary)")
    pp.add_argument("out", help="output prep container path")
    pp.add_argument("--co", help="DIMACS .co coordinate file")
    pp.add_argument("--variant", choices=VARIANTS, default="topocore-is")
    pp.add_argument("--order", choices=ORDERS, default="input",
                    help="node order before preprocessing")
    pp.add_argument("--seed", type=int, default=_default_seed())
    pp.set_defaults(func=cmd_preprocess)

    pq = sub.add_parser("query", help="answer one query from a prep container")
    pq.add_argument("prep", help="prep container path")
    pq.add_argument("--source", type=int, required=True)
    pq.add_argument("--target", type=int, required=True)
    pq.add_argument("--weights", type=int, nargs="+",
                    help="weights for the additive components")
    pq.add_argument("--vehicle", type=int, nargs="+",
                    help="vehicle values checked against threshold components")
    pq.add_argument("--bits", type=int, nargs="+",
                    help="required bitmask per bitfield component")
    pq.add_argument("--path", action="store_true", help="print the node sequence")
    pq.set_defaults(func=cmd_query)

    pb = sub.add_parser("bench", help="run a workload across engines")
    pb.add_argument("graph", help="DIMACS .gr file")
    pb.add_argument("costs", help="cost table file")
    pb.add_argument("--co", help="DIMACS .co coordinate file")
    pb.add_argument("--prep", help="prep container (needed for bilevel)")
    pb.add_argument("--queries", type=int, default=1000)
    pb.add_argument("--seed", type=int, default=_default_seed())
    pb.add_argument("--engines", default="uni,bi-mq,bilevel",
                    help="comma list from uni,bi-alt,bi-mk,bi-mq,bilevel")
    pb.add_argument("--mode", choices=synth.MODES, default="basic")
    pb.add_argument("--pad-costs", type=int, metavar="K",
                    help="pad cost vectors to K components with random additive costs")
    pb.add_argument("--workers", type=int, default=1)
    pb.add_argument("--tsv", help="write machine-readable rows to this path ('-' = stdout)")
    pb.set_defaults(func=cmd_bench)

    ps = sub.add_parser("stats", help="graph size and degree distribution")
    ps.add_argument("graph", help="DIMACS .gr file")
    ps.set_defaults(func=cmd_stats)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        parser.exit(2, f"usage error: {e}\n")
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
