"""Exact point-to-point queries under per-query objectives.

Three engines share the same jitted inner loops: plain Dijkstra,
bidirectional Dijkstra on a graph and its arc-reverse, and the
core-based bidirectional variant that runs on the preprocessed
forward/backward search graphs and only stops once no queued node
lies outside the core.  All engines skip forbidden arcs during
relaxation, so one preprocessed structure serves every objective.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from topocore import _kernels
from topocore._kernels import INF64
from topocore.costs import INF, CombineSpec, Objective
from topocore.graph import Graph

STRATEGIES = {
    "alt": _kernels.STRATEGY_ALT,
    "mk": _kernels.STRATEGY_MK,
    "mq": _kernels.STRATEGY_MQ,
}


def choose_forward(strategy: str, top_f, top_b, size_f, size_b, step: int) -> bool:
    """Side-selection rule used by the bidirectional search loop.

    alt alternates starting with forward; mk advances the side with
    the smaller queue minimum (forward on ties); mq advances forward
    whenever the backward queue is at least as large as the forward
    one.  Kept in sync with the jitted loop; unit tests pin it down.
    """
    if strategy == "alt":
        return step % 2 == 0
    if strategy == "mk":
        return top_f <= top_b
    if strategy == "mq":
        return size_b >= size_f
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class SearchStats:
    """Work counters for one query.

    pops counts heap removals over both directions; relaxed_arcs
    counts arc relaxations whose objective value was finite; elapsed
    is wall time in seconds around the search loop.
    """

    pops: int
    relaxed_arcs: int
    elapsed: float


@dataclass(frozen=True)
class QueryResult:
    distance: int | float
    path: list[int] | None
    stats: SearchStats


class SearchState:
    """Reusable arrays for one search direction.

    Entries are valid only while their generation stamp matches, so
    starting a new query is O(1) regardless of graph size.
    """

    def __init__(self, node_count: int):
        self.node_count = node_count
        self.dist = np.empty(node_count, dtype=np.int64)
        self.parent_arc = np.empty(node_count, dtype=np.int64)
        self.parent_node = np.empty(node_count, dtype=np.int64)
        self.pos = np.empty(node_count, dtype=np.int64)
        self.gen = np.zeros(node_count, dtype=np.uint32)
        self.heap = np.empty(node_count, dtype=np.int64)
        self.gen_id = 0

    def next_generation(self) -> int:
        self.gen_id += 1
        if self.gen_id >= 2**32:
            self.gen[:] = 0
            self.gen_id = 1
        return self.gen_id

    def reached(self, v: int) -> bool:
        return self.gen[v] == self.gen_id


def _check_endpoint(name: str, v: int, n: int):
    if not (0 <= v < n):
        raise ValueError(f"{name} node {v} out of range 0..{n - 1}")


def _walk_to_source(state: SearchState, v: int) -> list[int]:
    """Arc ids from the search source to v, in walk order."""
    arcs = []
    while state.parent_arc[v] != -1:
        arcs.append(int(state.parent_arc[v]))
        v = int(state.parent_node[v])
    arcs.reverse()
    return arcs


def _walk_from(state: SearchState, v: int) -> list[int]:
    """Arc ids from v to the search source, in that traversal order."""
    arcs = []
    while state.parent_arc[v] != -1:
        arcs.append(int(state.parent_arc[v]))
        v = int(state.parent_node[v])
    return arcs


def dijkstra_uni(
    graph: Graph,
    s: int,
    t: int,
    objective: Objective,
    spec: CombineSpec,
    *,
    state: SearchState | None = None,
    want_path: bool = False,
) -> QueryResult:
    """Unidirectional baseline; settles nodes until t comes off the heap."""
    _check_endpoint("source", s, graph.node_count)
    _check_endpoint("target", t, graph.node_count)
    if state is None:
        state = SearchState(graph.node_count)
    role = spec.role_array()
    param = objective.param_array(spec)
    gid = state.next_generation()
    t0 = time.perf_counter()
    d, pops, relaxed = _kernels.dijkstra_uni_kernel(
        graph.first_out, graph.head, graph.costs, role, param,
        np.int64(s), np.int64(t),
        state.dist, state.parent_arc, state.parent_node,
        state.pos, state.gen, np.uint32(gid), state.heap,
    )
    elapsed = time.perf_counter() - t0
    stats = SearchStats(int(pops), int(relaxed), elapsed)
    if d == INF64:
        return QueryResult(INF, None, stats)
    path = _walk_to_source(state, t) if want_path else None
    return QueryResult(int(d), path, stats)


def _run_bidirectional(
    fwd_arrays,
    bwd_arrays,
    node_count: int,
    core_count: int,
    s: int,
    t: int,
    objective: Objective,
    spec: CombineSpec,
    strategy: str,
    states: tuple[SearchState, SearchState] | None,
):
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; use one of {sorted(STRATEGIES)}")
    _check_endpoint("source", s, node_count)
    _check_endpoint("target", t, node_count)
    if states is None:
        states = (SearchState(node_count), SearchState(node_count))
    sf, sb = states
    role = spec.role_array()
    param = objective.param_array(spec)
    gid_f = sf.next_generation()
    gid_b = sb.next_generation()
    t0 = time.perf_counter()
    mu, meet, pops_f, pops_b, relaxed = _kernels.bidij_kernel(
        *fwd_arrays, *bwd_arrays, role, param,
        np.int64(s), np.int64(t),
        np.int64(STRATEGIES[strategy]), np.int64(core_count),
        sf.dist, sf.parent_arc, sf.parent_node, sf.pos, sf.gen, np.uint32(gid_f), sf.heap,
        sb.dist, sb.parent_arc, sb.parent_node, sb.pos, sb.gen, np.uint32(gid_b), sb.heap,
    )
    elapsed = time.perf_counter() - t0
    stats = SearchStats(int(pops_f) + int(pops_b), int(relaxed), elapsed)
    return int(mu), int(meet), sf, sb, stats


def dijkstra_bi(
    gf: Graph,
    gb: Graph,
    s: int,
    t: int,
    objective: Objective,
    spec: CombineSpec,
    *,
    strategy: str = "mq",
    gb_arc_map: np.ndarray | None = None,
    states: tuple[SearchState, SearchState] | None = None,
    want_path: bool = False,
) -> QueryResult:
    """Bidirectional search; gb must be the arc-reverse of gf.

    Path reporting needs gb_arc_map from graph.reverse_graph so
    backward parent arcs can be mapped to input arc ids.
    """
    if gf.node_count != gb.node_count or gf.arc_count != gb.arc_count:
        raise ValueError("gb does not match gf")
    if want_path and gb_arc_map is None:
        raise ValueError("want_path needs gb_arc_map (see graph.reverse_graph)")
    mu, meet, sf, sb, stats = _run_bidirectional(
        (gf.first_out, gf.head, gf.costs),
        (gb.first_out, gb.head, gb.costs),
        gf.node_count, gf.node_count, s, t, objective, spec, strategy, states,
    )
    if mu == INF64:
        return QueryResult(INF, None, stats)
    path = None
    if want_path:
        fwd = _walk_to_source(sf, meet)
        bwd = [int(gb_arc_map[a]) for a in _walk_from(sb, meet)]
        path = fwd + bwd
    return QueryResult(mu, path, stats)


def bilevel_query(
    prep,
    s: int,
    t: int,
    objective: Objective,
    *,
    strategy: str = "mq",
    states: tuple[SearchState, SearchState] | None = None,
    want_path: bool = False,
) -> QueryResult:
    """Core-based query; s and t are search-graph ids (see CorePrep.perm).

    The reported path is a sequence of input-graph arc ids with every
    shortcut already expanded.
    """
    fwd, bwd = prep.forward, prep.backward
    mu, meet, sf, sb, stats = _run_bidirectional(
        (fwd.first_out, fwd.head, fwd.costs),
        (bwd.first_out, bwd.head, bwd.costs),
        fwd.node_count, prep.core_count, s, t, objective, prep.spec, strategy, states,
    )
    if mu == INF64:
        return QueryResult(INF, None, stats)
    path = None
    if want_path:
        refs = [int(fwd.ref[a]) for a in _walk_to_source(sf, meet)]
        refs += [int(bwd.ref[a]) for a in _walk_from(sb, meet)]
        path = []
        for r in refs:
            _expand_ref(prep, r, path)
    return QueryResult(mu, path, stats)


def _expand_ref(prep, ref: int, out: list[int]):
    if ref < prep.input_arc_count:
        out.append(ref)
        return
    sc = ref - prep.input_arc_count
    lo = int(prep.sc_unpack_first[sc])
    hi = int(prep.sc_unpack_first[sc + 1])
    for r in prep.sc_unpack_refs[lo:hi]:
        _expand_ref(prep, int(r), out)


def unpack_path(prep, arcs, backward: bool = False) -> list[int]:
    """Expand a contiguous search-graph arc walk to input arc ids.

    Arcs must come from the forward (or, with backward=True, the
    backward) search graph and form a contiguous walk there; the
    expansion is checked to be a contiguous walk in the input graph.
    Malformed sequences raise ValueError.
    """
    sg = prep.backward if backward else prep.forward
    arcs = [int(a) for a in arcs]
    for a in arcs:
        if not (0 <= a < len(sg.head)):
            raise ValueError(f"arc id {a} out of range for the search graph")
    first_out = sg.first_out.astype(np.int64)
    for prev, nxt in zip(arcs, arcs[1:]):
        tail_next = int(np.searchsorted(first_out, nxt, side="right")) - 1
        if int(sg.head[prev]) != tail_next:
            raise ValueError(f"arcs {prev} and {nxt} do not form a contiguous walk")
    chunks: list[list[int]] = []
    for a in arcs:
        chunk: list[int] = []
        _expand_ref(prep, int(sg.ref[a]), chunk)
        chunks.append(chunk)
    if backward:
        # backward arcs expand in input orientation already; only the
        # arc-level order flips
        chunks.reverse()
    out: list[int] = [r for chunk in chunks for r in chunk]
    for prev, nxt in zip(out, out[1:]):
        if int(prep.input_head[prev]) != int(prep.input_tail[nxt]):
            raise ValueError("expansion is not contiguous in the input graph")
    return out
