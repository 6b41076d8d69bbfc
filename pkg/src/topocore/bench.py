"""Benchmark harness: identical workloads across engines, gated reports.

Engines (uni, bi-alt, bi-mk, bi-mq, bilevel) all answer the same
workload; the harness refuses to report anything unless every engine
returned exactly the same distance on every query.  Pop counts and
relaxation counts are deterministic given files and seeds; wall-clock
columns are informational only.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from topocore.core import CorePrep
from topocore.costs import CombineSpec, CostTable, Objective, Op
from topocore.graph import Graph, reverse_graph
from topocore.search import SearchState, bilevel_query, dijkstra_bi, dijkstra_uni
from topocore.synth import Workload

PLAIN_ENGINES = ("uni", "bi-alt", "bi-mk", "bi-mq")
ENGINES = PLAIN_ENGINES + ("bilevel",)
BASELINE_ENGINE = "uni"

TSV_COLUMNS = (
    "engine", "order", "strategy", "queries",
    "mean_pops", "mean_relaxed", "mean_time_ms", "speedup",
)
TIMING_COLUMNS = ("mean_time_ms", "speedup")


class BenchMismatch(RuntimeError):
    """Two engines disagreed on a query distance."""

    def __init__(self, engine_a, engine_b, index, s, t, da, db):
        self.engine_a, self.engine_b = engine_a, engine_b
        self.index, self.s, self.t = index, s, t
        self.da, self.db = da, db
        super().__init__(
            f"query {index} ({s} -> {t}): {engine_a} found {da}, {engine_b} found {db}"
        )


@dataclass(frozen=True)
class BenchRow:
    engine: str
    order: str
    strategy: str
    queries: int
    mean_pops: float
    mean_relaxed: float
    mean_time_ms: float
    speedup: float | None


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]

    def to_tsv(self) -> str:
        lines = ["\t".join(TSV_COLUMNS)]
        for r in self.rows:
            lines.append("\t".join([
                r.engine, r.order, r.strategy, str(r.queries),
                repr(r.mean_pops), repr(r.mean_relaxed),
                repr(r.mean_time_ms),
                "-" if r.speedup is None else repr(r.speedup),
            ]))
        return "\n".join(lines) + "\n"

    def deterministic_tsv(self) -> str:
        """TSV with wall-clock columns dropped, for run-to-run diffs."""
        keep = [i for i, c in enumerate(TSV_COLUMNS) if c not in TIMING_COLUMNS]
        out = []
        for line in self.to_tsv().rstrip("\n").split("\n"):
            cells = line.split("\t")
            out.append("\t".join(cells[i] for i in keep))
        return "\n".join(out) + "\n"


def parse_bench_tsv(text: str) -> BenchReport:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or tuple(lines[0].split("\t")) != TSV_COLUMNS:
        raise ValueError("not a benchmark report (bad or missing header)")
    rows = []
    for ln in lines[1:]:
        cells = ln.split("\t")
        if len(cells) != len(TSV_COLUMNS):
            raise ValueError(f"row has {len(cells)} cells, expected {len(TSV_COLUMNS)}")
        rows.append(BenchRow(
            engine=cells[0], order=cells[1], strategy=cells[2],
            queries=int(cells[3]), mean_pops=float(cells[4]),
            mean_relaxed=float(cells[5]), mean_time_ms=float(cells[6]),
            speedup=None if cells[7] == "-" else float(cells[7]),
        ))
    return BenchReport(rows=tuple(rows))


# ---------------------------------------------------------------------------
# engine execution


class _Engine:
    """One engine bound to its graph data, with per-thread search state."""

    def __init__(self, name, graph, gb, prep):
        self.name = name
        self.order = "input" if name in PLAIN_ENGINES else prep.order_name
        if name == "uni":
            self.strategy = "-"
        elif name == "bilevel":
            self.strategy = "mq"
        else:
            self.strategy = name.split("-", 1)[1]
        self._graph = graph
        self._gb = gb
        self._prep = prep
        self._local = threading.local()

    def run(self, s, t, obj, spec):
        if self.name == "uni":
            st = getattr(self._local, "uni", None)
            if st is None:
                st = self._local.uni = SearchState(self._graph.node_count)
            t0 = time.perf_counter()
            res = dijkstra_uni(self._graph, s, t, obj, spec, state=st)
        elif self.name == "bilevel":
            sts = getattr(self._local, "bl", None)
            if sts is None:
                n = self._prep.forward.node_count
                sts = self._local.bl = (SearchState(n), SearchState(n))
            ss = self._prep.search_id(s)
            tt = self._prep.search_id(t)
            t0 = time.perf_counter()
            res = bilevel_query(self._prep, ss, tt, obj, states=sts)
        else:
            sts = getattr(self._local, "bi", None)
            if sts is None:
                n = self._graph.node_count
                sts = self._local.bi = (SearchState(n), SearchState(n))
            t0 = time.perf_counter()
            res = dijkstra_bi(
                self._graph, self._gb, s, t, obj, spec,
                strategy=self.strategy, states=sts,
            )
        elapsed = time.perf_counter() - t0
        return res.distance, res.stats.pops, res.stats.relaxed_arcs, elapsed


@dataclass
class EngineRun:
    """Raw per-query results for one engine."""

    name: str
    order: str
    strategy: str
    distances: list
    pops: np.ndarray
    relaxed: np.ndarray
    seconds: np.ndarray


def run_engine(engine: _Engine, workload: Workload, spec: CombineSpec, workers: int = 1) -> EngineRun:
    nq = len(workload.queries)
    distances = [None] * nq
    pops = np.zeros(nq, dtype=np.int64)
    relaxed = np.zeros(nq, dtype=np.int64)
    seconds = np.zeros(nq, dtype=np.float64)

    def do(i):
        s, t, obj = workload.queries[i]
        d, p, r, el = engine.run(s, t, obj, spec)
        distances[i] = d
        pops[i] = p
        relaxed[i] = r
        seconds[i] = el

    if workers > 1 and nq:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(do, range(nq)))
    else:
        for i in range(nq):
            do(i)
    return EngineRun(engine.name, engine.order, engine.strategy,
                     distances, pops, relaxed, seconds)


def run_benchmark(
    graph: Graph,
    spec: CombineSpec,
    workload: Workload,
    engines=ENGINES,
    prep: CorePrep | None = None,
    workers: int = 1,
) -> tuple[BenchReport, list[EngineRun]]:
    """Run every engine over the workload and build a gated report.

    Queries address nodes of the given graph; the bilevel engine maps
    them through the prep's stored permutations.  Any cross-engine
    distance disagreement raises BenchMismatch before any report
    exists.
    """
    engines = list(engines)
    for e in engines:
        if e not in ENGINES:
            raise ValueError(f"unknown engine {e!r}; choose from {ENGINES}")
    if "bilevel" in engines:
        if prep is None:
            raise ValueError("bilevel engine needs a prep")
        if prep.node_count != graph.node_count:
            raise ValueError(
                f"prep covers {prep.node_count} nodes, graph has {graph.node_count}"
            )
        if prep.spec != spec:
            raise ValueError("prep was built for a different component layout")
    if not workload.queries:
        return BenchReport(rows=()), []
    gb = None
    if any(e.startswith("bi-") for e in engines):
        gb, _ = reverse_graph(graph)

    runs = [
        run_engine(_Engine(name, graph, gb, prep), workload, spec, workers)
        for name in engines
    ]

    if len(runs) > 1:
        ref = runs[0]
        for other in runs[1:]:
            for i, (da, db) in enumerate(zip(ref.distances, other.distances)):
                if da != db:
                    s, t, _ = workload.queries[i]
                    raise BenchMismatch(ref.name, other.name, i, s, t, da, db)

    base_ms = None
    for r in runs:
        if r.name == BASELINE_ENGINE and len(workload.queries):
            base_ms = 1e3 * float(r.seconds.mean())
    rows = []
    for r in runs:
        nq = len(workload.queries)
        mean_ms = 1e3 * float(r.seconds.mean()) if nq else 0.0
        rows.append(BenchRow(
            engine=r.name, order=r.order, strategy=r.strategy, queries=nq,
            mean_pops=float(r.pops.mean()) if nq else 0.0,
            mean_relaxed=float(r.relaxed.mean()) if nq else 0.0,
            mean_time_ms=mean_ms,
            speedup=(base_ms / mean_ms) if base_ms and mean_ms > 0 else None,
        ))
    return BenchReport(rows=tuple(rows)), runs


# ---------------------------------------------------------------------------
# cost padding


def pad_cost_table(table: CostTable, k_target: int, seed: int) -> CostTable:
    """Widen a table with extra additive components, uniform [0, 100].

    Replicates the width-scaling experiment: the original components
    stay in place, new ones are random additive noise.
    """
    k = table.spec.k
    if k_target < k:
        raise ValueError(f"cannot pad {k} components down to {k_target}")
    if k_target == k:
        return table
    rng = np.random.default_rng([seed, k_target])
    extra = rng.integers(0, 101, (len(table.rows), k_target - k), dtype=np.int64)
    rows = np.concatenate([table.rows, extra.astype(np.uint32)], axis=1)
    spec = CombineSpec(table.spec.ops + (Op.ADD,) * (k_target - k))
    return CostTable(spec, rows)


def pad_workload(workload: Workload, k_from: int, k_target: int, seed: int) -> Workload:
    """Extend each query's additive weights to match a padded table."""
    if k_target < k_from:
        raise ValueError(f"cannot pad {k_from} components down to {k_target}")
    if k_target == k_from:
        return workload
    rng = np.random.default_rng([seed, k_target, 1])
    extra = rng.integers(0, 101, (len(workload.queries), k_target - k_from))
    queries = []
    for i, (s, t, obj) in enumerate(workload.queries):
        pad = tuple(int(x) for x in extra[i])
        queries.append((s, t, Objective(
            add_weights=obj.add_weights + pad,
            vehicle_values=obj.vehicle_values,
            required_bits=obj.required_bits,
        )))
    return Workload(queries=tuple(queries), seed=workload.seed, mode=workload.mode)
