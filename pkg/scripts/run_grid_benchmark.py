"""Desk-scale benchmark on a synthetic road-like grid.

Builds a bidirected lattice with subdivided edges and dangling trees,
synthesizes an 8-component cost table, preprocesses both core
variants, and compares engines on long-distance queries.  Everything
is seeded, so two runs print the same counts (timings move).

    python3 scripts/run_grid_benchmark.py --rows 120 --cols 120 --queries 200
"""

import argparse
import sys
import time

import numpy as np

from topocore import Objective, cleanup, run_pipeline, synth
from topocore.bench import run_benchmark
from topocore.synth import Workload


def long_distance_workload(rows, cols, node_count, count, min_manhattan, seed):
    """Lattice endpoint pairs at least min_manhattan blocks apart."""
    rng = np.random.default_rng(seed)
    queries = []
    while len(queries) < count:
        s, t = (int(x) for x in rng.integers(0, rows * cols, size=2))
        dr = abs(s // cols - t // cols)
        dc = abs(s % cols - t % cols)
        if dr + dc < min_manhattan:
            continue
        weights = tuple(int(x) for x in rng.integers(0, 101, size=8))
        queries.append((s, t, Objective(add_weights=weights,
                                        vehicle_values=(), required_bits=())))
    assert all(s < node_count and t < node_count for s, t, _ in queries)
    return Workload(queries=tuple(queries), seed=seed, mode="basic")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=300)
    ap.add_argument("--cols", type=int, default=300)
    ap.add_argument("--queries", type=int, default=100)
    ap.add_argument("--min-manhattan", type=int, default=None,
                    help="minimum lattice distance between endpoints "
                         "(default: half of min(rows, cols))")
    ap.add_argument("--seed", type=int, default=8814)
    ap.add_argument("--engines", default="uni,bi-alt,bi-mk,bi-mq,bilevel")
    ap.add_argument("--variant", default="topocore-is",
                    choices=("topocore", "topocore-is"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--tsv", help="write machine-readable rows here")
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    grid = cleanup(synth.grid_instance(args.rows, args.cols, seed=args.seed))
    table = synth.synthesize_costs(grid, "basic", seed=args.seed + 1)
    graph = grid.with_costs(table.rows)
    print(f"grid {args.rows}x{args.cols}: {graph.node_count} nodes, "
          f"{graph.arc_count} arcs ({time.perf_counter() - t0:.1f}s to build)")

    t0 = time.perf_counter()
    prep = run_pipeline(graph, table.spec, args.variant)
    st = prep.stats
    print(f"{args.variant}: core {prep.core_count} nodes "
          f"({100.0 * prep.core_count / graph.node_count:.1f}%), "
          f"{st.shortcut_count} shortcuts, "
          f"{time.perf_counter() - t0:.1f}s to preprocess")

    min_manhattan = args.min_manhattan
    if min_manhattan is None:
        min_manhattan = min(args.rows, args.cols) // 2
    workload = long_distance_workload(
        args.rows, args.cols, graph.node_count,
        args.queries, min_manhattan, args.seed + 2,
    )
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    report, runs = run_benchmark(graph, table.spec, workload, engines,
                                 prep=prep, workers=args.workers)

    header = f"{'engine':<10} {'strat':<6} {'mean pops':>12} " \
             f"{'mean relaxed':>13} {'ms/query':>9} {'speedup':>8}"
    print(header)
    for r in report.rows:
        sp = f"{r.speedup:.2f}" if r.speedup is not None else "-"
        print(f"{r.engine:<10} {r.strategy:<6} {r.mean_pops:>12.1f} "
              f"{r.mean_relaxed:>13.1f} {r.mean_time_ms:>9.3f} {sp:>8}")

    by_name = {r.name: r for r in runs}
    if "uni" in by_name and "bilevel" in by_name:
        ratio = by_name["bilevel"].pops.sum() / max(by_name["uni"].pops.sum(), 1)
        print(f"bilevel settles {100.0 * ratio:.1f}% of the baseline's nodes")
    if args.tsv:
        with open(args.tsv, "w", encoding="ascii") as f:
            f.write(report.to_tsv())
        print(f"wrote {args.tsv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
