"""Exact shortest paths with per-query objectives on a topology-only core.

Costs are small integer vectors combined componentwise (saturating
add, min, bitwise and); a query supplies weights, thresholds and
required bits and gets back an exact scalar distance.  Preprocessing
(run_pipeline) looks only at the graph structure, so its output is
shared by all objectives; queries run as bidirectional searches on a
pair of pruned search graphs with a core-aware stopping rule.
"""

from topocore.costs import (
    COMPONENT_MAX,
    INF,
    CombineSpec,
    CostTable,
    Objective,
    Op,
    combine,
    evaluate,
    fold,
)
from topocore.core import (
    VARIANTS,
    BccResult,
    CorePrep,
    PipelineStats,
    SearchGraph,
    biconnected_components,
    run_pipeline,
)
from topocore.graph import (
    Graph,
    Permutation,
    build_graph,
    build_graph_arrays,
    cleanup,
    dfs_preorder,
    random_order,
    reverse_graph,
)
from topocore.bench import (
    BenchMismatch,
    BenchReport,
    BenchRow,
    parse_bench_tsv,
    run_benchmark,
)
from topocore.fileio import (
    PrepFormatError,
    load_prep,
    memory_estimate,
    parse_dimacs,
    read_cost_file,
    save_prep,
    write_cost_file,
    write_dimacs,
)
from topocore.search import (
    STRATEGIES,
    QueryResult,
    SearchState,
    bilevel_query,
    dijkstra_bi,
    dijkstra_uni,
    unpack_path,
)
from topocore.synth import (
    Workload,
    generate_workload,
    grid_instance,
    haversine_meters,
    permute_workload,
    synthesize_costs,
)

__all__ = [
    "COMPONENT_MAX",
    "INF",
    "CombineSpec",
    "CostTable",
    "Objective",
    "Op",
    "combine",
    "evaluate",
    "fold",
    "VARIANTS",
    "BccResult",
    "CorePrep",
    "PipelineStats",
    "SearchGraph",
    "biconnected_components",
    "run_pipeline",
    "Graph",
    "Permutation",
    "build_graph",
    "build_graph_arrays",
    "cleanup",
    "dfs_preorder",
    "random_order",
    "reverse_graph",
    "STRATEGIES",
    "QueryResult",
    "SearchState",
    "bilevel_query",
    "dijkstra_bi",
    "dijkstra_uni",
    "unpack_path",
    "BenchMismatch",
    "BenchReport",
    "BenchRow",
    "parse_bench_tsv",
    "run_benchmark",
    "PrepFormatError",
    "load_prep",
    "memory_estimate",
    "parse_dimacs",
    "read_cost_file",
    "save_prep",
    "write_cost_file",
    "write_dimacs",
    "Workload",
    "generate_workload",
    "grid_instance",
    "haversine_meters",
    "permute_workload",
    "synthesize_costs",
]

__version__ = "0.1.0"
