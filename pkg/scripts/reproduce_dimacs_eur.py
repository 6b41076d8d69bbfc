"""Core sizes and query speedup on the DIMACS Europe road network.

The graph is not bundled (the .gr file alone is ~500 MB).  Download
the Europe travel-time graph from the 9th DIMACS Implementation
Challenge site and point this script (or TOPOCORE_DATA_DIR) at it;
with no argument the script explains where to get the data and exits.

Expected outcome: the chain-free core keeps roughly 40% of the nodes,
the contracted variant roughly 24%, and core-based queries beat the
input-order unidirectional baseline by well over 5x.

    python3 scripts/reproduce_dimacs_eur.py /data/Eur.gr --queries 100
"""

import argparse
import os
import sys
import time

from topocore import cleanup, fileio, run_pipeline, synth
from topocore.bench import run_benchmark

DOWNLOAD_HINT = """\
No usable .gr file found.  Fetch the Europe road network (travel-time
graph) from the 9th DIMACS Implementation Challenge download page:

    http://www.diag.uniroma1.it/challenge9/download.shtml

then rerun with the path to the extracted .gr file, or set
TOPOCORE_DATA_DIR to a directory containing a *eur*.gr file.  Any
DIMACS-format road graph works; the published core fractions are
specific to Europe."""


def find_graph(arg_path):
    if arg_path:
        return arg_path
    data_dir = os.environ.get("TOPOCORE_DATA_DIR")
    if data_dir and os.path.isdir(data_dir):
        for name in sorted(os.listdir(data_dir)):
            if name.endswith(".gr") and "eur" in name.lower():
                return os.path.join(data_dir, name)
    return None


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("graph", nargs="?", help="DIMACS .gr file")
    ap.add_argument("--co", help="matching .co coordinate file")
    ap.add_argument("--queries", type=int, default=100)
    ap.add_argument("--seed", type=int, default=8814)
    ap.add_argument("--tsv", help="write machine-readable rows here")
    args = ap.parse_args(argv)

    path = find_graph(args.graph)
    if path is None or not os.path.exists(path):
        print(DOWNLOAD_HINT, file=sys.stderr)
        return 1

    t0 = time.perf_counter()
    graph = cleanup(fileio.parse_dimacs(path, args.co))
    print(f"{path}: {graph.node_count} nodes, {graph.arc_count} arcs "
          f"after cleanup ({time.perf_counter() - t0:.1f}s to parse)")
    table = synth.synthesize_costs(graph, "basic", seed=args.seed)
    graph = graph.with_costs(table.rows)

    preps = {}
    for variant in ("topocore", "topocore-is"):
        t0 = time.perf_counter()
        prep = run_pipeline(graph, table.spec, variant)
        preps[variant] = prep
        frac = 100.0 * prep.core_count / graph.node_count
        print(f"{variant}: {prep.core_count} core nodes ({frac:.1f}%), "
              f"{prep.shortcut_count} shortcuts, "
              f"{time.perf_counter() - t0:.1f}s to preprocess")

    workload = synth.generate_workload(graph, args.queries, "basic", args.seed)
    report, _ = run_benchmark(graph, table.spec, workload,
                              engines=("uni", "bi-mq", "bilevel"),
                              prep=preps["topocore-is"])
    for r in report.rows:
        sp = f"{r.speedup:.2f}x" if r.speedup is not None else "-"
        print(f"{r.engine:<10} mean pops {r.mean_pops:>12.1f}  "
              f"ms/query {r.mean_time_ms:>9.3f}  speedup {sp}")
    if args.tsv:
        with open(args.tsv, "w", encoding="ascii") as f:
            f.write(report.to_tsv())
        print(f"wrote {args.tsv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
