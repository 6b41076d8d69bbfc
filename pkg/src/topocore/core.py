"""Topology-only preprocessing: carve a graph core and build search graphs.

The pipeline keeps a node subset (the core) chosen purely from the
graph structure, never from costs, so one preprocessing run serves
every future objective:

1. keep the largest biconnected component (dead-end trees and their
   attachments drop out),
2. bypass chains of nodes with exactly two distinct core neighbors
   with cost-combined shortcut arcs, repeated until no such node is
   left (a core that is one pure cycle collapses to its smallest-id
   anchor node, loop shortcuts are never created),
3. optionally contract a greedy independent set of nodes with exactly
   three incident core arcs, pairing their in- and out-arcs.

Queries then run bidirectionally on a forward graph (core-leaving
arcs removed) and a backward reversed graph (core-entering arcs
removed); shortcut arcs carry unpack references back to input arcs.
"""

from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from topocore._kernels import bcc_kernel
from topocore.costs import COMPONENT_MAX, CombineSpec, Op
from topocore.graph import Graph, Permutation

VARIANTS = ("topocore", "topocore-is")


# ---------------------------------------------------------------------------
# biconnected components


@dataclass(frozen=True)
class BccResult:
    """Biconnected components of the undirected simple view.

    Each undirected edge {u, v} (u < v, self-loops and multiplicities
    collapsed) carries one component label.  Nodes can belong to
    several components; isolated nodes belong to none.
    """

    node_count: int
    edge_tail: np.ndarray = field(repr=False)
    edge_head: np.ndarray = field(repr=False)
    edge_comp: np.ndarray = field(repr=False)
    comp_count: int = 0

    def membership_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """(component, node) pairs, deduplicated."""
        comps = np.concatenate([self.edge_comp, self.edge_comp])
        nodes = np.concatenate([self.edge_tail, self.edge_head])
        keys = np.unique(comps * np.int64(self.node_count) + nodes)
        return keys // self.node_count, keys % self.node_count

    def component_node_counts(self) -> np.ndarray:
        comps, _ = self.membership_pairs()
        return np.bincount(comps, minlength=self.comp_count)

    def largest_component_nodes(self) -> np.ndarray:
        """Node mask of the component with the most nodes.

        Ties go to the component containing the smallest node id.
        """
        comps, nodes = self.membership_pairs()
        counts = np.bincount(comps, minlength=self.comp_count)
        best = counts.max(initial=0)
        order = np.argsort(nodes, kind="stable")
        for i in order:
            if counts[comps[i]] == best:
                winner = comps[i]
                break
        mask = np.zeros(self.node_count, dtype=bool)
        mask[nodes[comps == winner]] = True
        return mask


def biconnected_components(graph: Graph) -> BccResult:
    n = graph.node_count
    t = graph.tails().astype(np.int64)
    h = graph.head.astype(np.int64)
    keep = t != h
    lo = np.minimum(t[keep], h[keep])
    hi = np.maximum(t[keep], h[keep])
    keys = np.unique(lo * np.int64(n) + hi)
    eu = keys // n
    ev = keys % n
    edge_count = len(keys)
    src = np.concatenate([eu, ev])
    dst = np.concatenate([ev, eu])
    eid = np.concatenate([np.arange(edge_count, dtype=np.int64)] * 2)
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n)
    first = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=first[1:])
    edge_comp = np.full(edge_count, -1, dtype=np.int64)
    ncomp = 0
    if edge_count:
        ncomp = int(
            bcc_kernel(first, dst[order], eid[order], n, edge_count, edge_comp)
        )
    return BccResult(
        node_count=n,
        edge_tail=eu,
        edge_head=ev,
        edge_comp=edge_comp,
        comp_count=ncomp,
    )


def step1_largest_bcc(graph: Graph) -> np.ndarray:
    """Initial core: nodes of the largest biconnected component.

    An edgeless graph keeps every node in the core (each node is its
    own trivial piece; there is nothing to prune).
    """
    res = biconnected_components(graph)
    if res.comp_count == 0:
        return np.ones(graph.node_count, dtype=bool)
    return res.largest_component_nodes()


# ---------------------------------------------------------------------------
# working state for steps 2 and 3


class _CoreState:
    """Original arcs plus created shortcuts, addressed by unpack ref.

    Refs 0..m-1 are input arcs; refs >= m index shortcuts in creation
    order.  An entity takes part in the current core graph exactly
    when both endpoints are still core nodes.
    """

    def __init__(self, graph: Graph, spec: CombineSpec):
        self.spec = spec
        self.input_arc_count = graph.arc_count
        self._tail_blocks = [graph.tails().astype(np.int64)]
        self._head_blocks = [graph.head.astype(np.int64)]
        self._cost_blocks = [graph.costs]
        self._cached = None
        self.sc_unpack: list[list[int]] = []
        self.saturated_shortcuts = 0

    @property
    def shortcut_count(self) -> int:
        return len(self.sc_unpack)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._cached is None:
            self._cached = (
                np.concatenate(self._tail_blocks),
                np.concatenate(self._head_blocks),
                np.concatenate(self._cost_blocks) if len(self._cost_blocks) > 1
                else self._cost_blocks[0],
            )
        return self._cached

    def add_shortcuts(self, tails, heads, costs, unpacks, saturated) -> None:
        tails = np.asarray(tails, dtype=np.int64)
        if len(tails) == 0:
            return
        self._tail_blocks.append(tails)
        self._head_blocks.append(np.asarray(heads, dtype=np.int64))
        self._cost_blocks.append(np.ascontiguousarray(costs, dtype=np.uint32))
        self.sc_unpack.extend(unpacks)
        self._cached = None
        self.saturated_shortcuts += int(saturated)

    def flatten_ref(self, ref: int) -> list[int]:
        """Input arc ids behind a ref; chain shortcuts are stored flat."""
        if ref < self.input_arc_count:
            return [int(ref)]
        return list(self.sc_unpack[ref - self.input_arc_count])

    def alive(self, core: np.ndarray) -> np.ndarray:
        t, h, _ = self.arrays()
        return core[t] & core[h]

    def alive_count(self, core: np.ndarray) -> int:
        return int(self.alive(core).sum())


def _fold_stack(stack: np.ndarray, spec: CombineSpec) -> tuple[np.ndarray, np.ndarray]:
    """Combine along axis 1 of a (g, L, k) stack; flags saturated rows."""
    g = stack.shape[0]
    out = np.empty((g, spec.k), dtype=np.uint32)
    saturated = np.zeros(g, dtype=bool)
    for i, op in enumerate(spec.ops):
        col = stack[:, :, i]
        if op == Op.ADD:
            s = col.astype(np.uint64).sum(axis=1)
            saturated |= s > COMPONENT_MAX
            out[:, i] = np.minimum(s, COMPONENT_MAX).astype(np.uint32)
        elif op == Op.MIN:
            out[:, i] = col.min(axis=1)
        else:
            out[:, i] = np.bitwise_and.reduce(col, axis=1)
    return out, saturated


@dataclass
class PipelineStats:
    """Deterministic preprocessing summary (timings reported separately)."""

    variant: str = ""
    input_nodes: int = 0
    input_arcs: int = 0
    bcc_components: int = 0
    core_nodes_step1: int = 0
    core_arcs_step1: int = 0
    core_nodes_step2: int = 0
    core_arcs_step2: int = 0
    core_nodes_final: int = 0
    core_arcs_final: int = 0
    chain_count: int = 0
    chain_arcs: int = 0
    chain_rounds: int = 0
    cycle_count: int = 0
    is_set_size: int = 0
    shortcut_count: int = 0
    saturated_shortcuts: int = 0
    core_deg3_final: int = 0
    timings: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# step 2: chain bypass


def _distinct_neighbor_csr(t, h, n):
    """CSR of distinct undirected neighbors over the given arcs."""
    keep = t != h
    u = np.concatenate([t[keep], h[keep]])
    v = np.concatenate([h[keep], t[keep]])
    keys = np.unique(u * np.int64(n) + v)
    src = keys // n
    dst = keys % n
    counts = np.bincount(src, minlength=n)
    first = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=first[1:])
    return first, dst


def _walk_chains(core, interior, first, nbr):
    """Maximal runs of interior nodes, plus pure interior cycles.

    Chains come back as node sequences [e0, i1, .., ij, e1] with
    non-interior endpoints; cycles as their interior node lists.
    """
    chains = []
    cycles = []
    visited = np.zeros(len(core), dtype=bool)
    for v0 in np.flatnonzero(interior):
        if visited[v0]:
            continue
        v0 = int(v0)
        visited[v0] = True
        nb0 = int(nbr[first[v0]])
        nb1 = int(nbr[first[v0] + 1])
        rights = []
        prev, cur = v0, nb1
        while interior[cur] and cur != v0:
            visited[cur] = True
            rights.append(cur)
            a = int(nbr[first[cur]])
            b = int(nbr[first[cur] + 1])
            prev, cur = cur, (b if a == prev else a)
        if cur == v0:
            cycles.append([v0] + rights)
            continue
        right_end = cur
        lefts = []
        prev, cur = v0, nb0
        while interior[cur] and cur != v0:
            visited[cur] = True
            lefts.append(cur)
            a = int(nbr[first[cur]])
            b = int(nbr[first[cur] + 1])
            prev, cur = cur, (b if a == prev else a)
        chains.append([cur] + lefts[::-1] + [v0] + rights + [right_end])
    return chains, cycles


def step2_remove_chains(state: _CoreState, core: np.ndarray, stats: PipelineStats) -> None:
    """Bypass two-neighbor chains until none remain (in place).

    Each round finds maximal chains whose interior nodes have exactly
    two distinct core neighbors, drops the interiors from the core,
    and adds one shortcut per fully arc-covered direction (one per
    combination when parallel core arcs cover a hop).  Bypassing can
    push an endpoint down to two distinct neighbors, hence the rounds.
    A chain closing on a single endpoint, like a pure cycle, yields no
    shortcut: loops cannot lie on a loop-free route.
    """
    n = len(core)
    while True:
        t_all, h_all, cost_all = state.arrays()
        alive = state.alive(core)
        t = t_all[alive]
        h = h_all[alive]
        refs = np.flatnonzero(alive)
        first, nbr = _distinct_neighbor_csr(t, h, n)
        deg = np.diff(first)
        interior = core & (deg == 2)
        if not interior.any():
            break
        stats.chain_rounds += 1
        chains, cycles = _walk_chains(core, interior, first, nbr)
        for cyc in cycles:
            anchor = min(cyc)
            for v in cyc:
                if v != anchor:
                    core[v] = False
            stats.cycle_count += 1
        if not chains:
            continue
        for nodes in chains:
            core[np.asarray(nodes[1:-1])] = False
        stats.chain_count += len(chains)
        stats.chain_arcs += sum(len(nodes) - 1 for nodes in chains)

        # directed hop lookup over the entities alive at round start
        keys = t * np.int64(n) + h
        order = np.argsort(keys, kind="stable")
        sorted_keys = keys[order]
        sorted_refs = refs[order]

        hop_t = []
        hop_h = []
        rec_len = []
        for nodes in chains:
            if nodes[0] == nodes[-1]:
                continue  # loop at one endpoint: interiors removed, no shortcut
            L = len(nodes) - 1
            for j in range(L):
                hop_t.append(nodes[j])
                hop_h.append(nodes[j + 1])
            for j in range(L - 1, -1, -1):
                hop_t.append(nodes[j + 1])
                hop_h.append(nodes[j])
            rec_len.append(L)
            rec_len.append(L)
        if not rec_len:
            continue
        hop_t = np.asarray(hop_t, dtype=np.int64)
        hop_h = np.asarray(hop_h, dtype=np.int64)
        hop_keys = hop_t * np.int64(n) + hop_h
        lo = np.searchsorted(sorted_keys, hop_keys, side="left")
        hi = np.searchsorted(sorted_keys, hop_keys, side="right")
        hop_mult = hi - lo

        rec_len = np.asarray(rec_len, dtype=np.int64)
        rec_first = np.zeros(len(rec_len) + 1, dtype=np.int64)
        np.cumsum(rec_len, out=rec_first[1:])

        new_t = []
        new_h = []
        new_cost_rows = []
        new_unpacks = []
        saturated = 0

        # fully covered single-multiplicity records, batched by length
        by_len: dict[int, list[int]] = {}
        multi_records = []
        for r in range(len(rec_len)):
            a, b = rec_first[r], rec_first[r + 1]
            m = hop_mult[a:b]
            if m.min() < 1:
                continue
            if m.max() == 1:
                by_len.setdefault(int(rec_len[r]), []).append(r)
            else:
                multi_records.append(r)

        for L, recs in sorted(by_len.items()):
            offsets = rec_first[recs]
            idx = offsets[:, None] + np.arange(L)[None, :]
            ent = sorted_refs[lo[idx]]
            folded, sat = _fold_stack(cost_all[ent], state.spec)
            saturated += int(sat.sum())
            for row, r in enumerate(recs):
                new_t.append(int(hop_t[rec_first[r]]))
                new_h.append(int(hop_h[rec_first[r + 1] - 1]))
                unpack: list[int] = []
                for e in ent[row]:
                    unpack.extend(state.flatten_ref(int(e)))
                new_unpacks.append(unpack)
            new_cost_rows.append(folded)

        # hops with parallel core arcs: one shortcut per combination
        for r in multi_records:
            a, b = rec_first[r], rec_first[r + 1]
            options = [sorted_refs[lo[j]:hi[j]] for j in range(a, b)]
            for combo in itertools.product(*options):
                ent = np.asarray(combo, dtype=np.int64)
                folded, sat = _fold_stack(cost_all[ent][None, :, :], state.spec)
                saturated += int(sat.sum())
                new_t.append(int(hop_t[a]))
                new_h.append(int(hop_h[b - 1]))
                unpack = []
                for e in combo:
                    unpack.extend(state.flatten_ref(int(e)))
                new_unpacks.append(unpack)
                new_cost_rows.append(folded)

        if new_t:
            costs = np.concatenate(new_cost_rows)
            state.add_shortcuts(new_t, new_h, costs, new_unpacks, saturated)


# ---------------------------------------------------------------------------
# step 3: independent-set contraction


def step3_independent_set(state: _CoreState, core: np.ndarray) -> np.ndarray:
    """Greedy node set for contraction, on a frozen degree snapshot.

    Eligible nodes have exactly three incident core arcs (directions
    and parallels counted).  Walking node ids in ascending order (DFS
    pre-order under the pipeline's input contract), a node joins the
    set when none of its neighbors joined before it.
    """
    n = len(core)
    t_all, h_all, _ = state.arrays()
    alive = state.alive(core)
    t = t_all[alive]
    h = h_all[alive]
    deg = np.bincount(t, minlength=n) + np.bincount(h, minlength=n)
    eligible = core & (deg == 3)
    in_set = np.zeros(n, dtype=bool)
    if not eligible.any():
        return in_set
    src = np.concatenate([t, h])
    dst = np.concatenate([h, t])
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=n)
    first = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=first[1:])
    dst = dst[order]
    for v in np.flatnonzero(eligible):
        ok = True
        for i in range(first[v], first[v + 1]):
            if in_set[dst[i]]:
                ok = False
                break
        if ok:
            in_set[v] = True
    return in_set


def step3_contract(state: _CoreState, core: np.ndarray, in_set: np.ndarray) -> None:
    """Remove set nodes, pairing every in-arc with every out-arc.

    Pair shortcuts keep two unpack refs (arc or earlier shortcut) and
    expand recursively; (u, u) loops are skipped.
    """
    t_all, h_all, cost_all = state.arrays()
    alive = state.alive(core)
    refs = np.flatnonzero(alive)
    t = t_all[refs]
    h = h_all[refs]
    n = len(core)
    by_tail_order = np.argsort(t, kind="stable")
    tail_first = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(t, minlength=n), out=tail_first[1:])
    by_head_order = np.argsort(h, kind="stable")
    head_first = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(h, minlength=n), out=head_first[1:])

    new_t = []
    new_h = []
    new_costs = []
    new_unpacks = []
    saturated = 0
    for v in np.flatnonzero(in_set):
        ins = refs[by_head_order[head_first[v]:head_first[v + 1]]]
        outs = refs[by_tail_order[tail_first[v]:tail_first[v + 1]]]
        for a in ins:
            u = int(t_all[a])
            for b in outs:
                w = int(h_all[b])
                if u == w:
                    continue
                stack = cost_all[np.asarray([a, b], dtype=np.int64)][None, :, :]
                folded, sat = _fold_stack(stack, state.spec)
                saturated += int(sat.sum())
                new_t.append(u)
                new_h.append(w)
                new_costs.append(folded)
                new_unpacks.append([int(a), int(b)])
        core[v] = False
    if new_t:
        state.add_shortcuts(
            new_t, new_h, np.concatenate(new_costs), new_unpacks, saturated
        )


# ---------------------------------------------------------------------------
# ordering and search graphs


def build_core_first_order(core: np.ndarray, prior: Permutation | None = None) -> Permutation:
    """Stable partition: core nodes first, both parts keep their order.

    With prior given, returns the composition prior-then-partition, so
    callers can fold the whole reordering into one permutation.
    """
    n = len(core)
    order = np.concatenate([np.flatnonzero(core), np.flatnonzero(~core)])
    new_id = np.empty(n, dtype=np.uint32)
    new_id[order] = np.arange(n, dtype=np.uint32)
    part = Permutation(new_id)
    return prior.then(part) if prior is not None else part


@dataclass(frozen=True)
class SearchGraph:
    """Adjacency array for one search direction, in search-id space.

    ref maps every arc back to an input arc id (< input arc count) or
    a shortcut id offset by the input arc count.
    """

    node_count: int
    first_out: np.ndarray = field(repr=False)
    head: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)
    ref: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name, dtype in (
            ("first_out", np.uint32), ("head", np.uint32),
            ("costs", np.uint32), ("ref", np.int64),
        ):
            arr = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def arc_count(self) -> int:
        return len(self.head)


def _build_search_csr(n, tails, heads, costs, refs) -> SearchGraph:
    tails = np.asarray(tails, dtype=np.int64)
    order = np.argsort(tails, kind="stable")
    first_out = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(tails, minlength=n), out=first_out[1:])
    return SearchGraph(
        node_count=n,
        first_out=first_out,
        head=np.asarray(heads, dtype=np.int64)[order].astype(np.uint32),
        costs=np.ascontiguousarray(costs, dtype=np.uint32)[order],
        ref=np.asarray(refs, dtype=np.int64)[order],
    )


@dataclass(frozen=True)
class CorePrep:
    """Everything a core-based query needs, plus path unpacking data.

    Node ids: user ids feed order_perm, whose output (pipeline input
    ids) feeds perm, whose output are search ids; core nodes are
    exactly the search ids below core_count.  Arc ids in unpack data
    refer to the pipeline input graph.
    """

    spec: CombineSpec
    variant: str
    core_count: int
    forward: SearchGraph
    backward: SearchGraph
    order_name: str
    sc_tail: np.ndarray = field(repr=False)
    sc_head: np.ndarray = field(repr=False)
    sc_cost: np.ndarray = field(repr=False)
    sc_unpack_first: np.ndarray = field(repr=False)
    sc_unpack_refs: np.ndarray = field(repr=False)
    input_tail: np.ndarray = field(repr=False)
    input_head: np.ndarray = field(repr=False)
    perm: Permutation = field(repr=False)
    order_perm: Permutation = field(repr=False)
    stats: PipelineStats | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        for name, dtype in (
            ("sc_tail", np.int64), ("sc_head", np.int64), ("sc_cost", np.uint32),
            ("sc_unpack_first", np.int64), ("sc_unpack_refs", np.int64),
            ("input_tail", np.uint32), ("input_head", np.uint32),
        ):
            arr = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def node_count(self) -> int:
        return len(self.perm)

    @property
    def input_arc_count(self) -> int:
        return len(self.input_tail)

    @property
    def shortcut_count(self) -> int:
        return len(self.sc_tail)

    def expand_shortcut(self, sc: int) -> list[int]:
        """Input arc ids behind shortcut sc, fully expanded."""
        out: list[int] = []
        self._expand(int(sc) + self.input_arc_count, out)
        return out

    def _expand(self, ref: int, out: list[int]):
        if ref < self.input_arc_count:
            out.append(ref)
            return
        sc = ref - self.input_arc_count
        for r in self.sc_unpack_refs[self.sc_unpack_first[sc]:self.sc_unpack_first[sc + 1]]:
            self._expand(int(r), out)

    def search_id(self, user_node: int) -> int:
        return int(self.perm.new_id[self.order_perm.new_id[user_node]])


def build_search_graphs(
    graph: Graph,
    core: np.ndarray,
    state: _CoreState,
    perm: Permutation,
) -> tuple[SearchGraph, SearchGraph]:
    """Assemble forward/backward search graphs in search-id space.

    Forward keeps input arcs that do not leave the core plus all
    surviving shortcuts; backward mirrors this on the reversed graph,
    dropping arcs that enter the core.
    """
    p = perm.new_id.astype(np.int64)
    t = graph.tails().astype(np.int64)
    h = graph.head.astype(np.int64)
    core_t = core[t]
    core_h = core[h]
    m = graph.arc_count
    arc_ids = np.arange(m, dtype=np.int64)

    sc_t_all, sc_h_all, sc_cost_all = state.arrays()
    sc_alive = state.alive(core)
    sc_alive[:m] = False
    sc_refs = np.flatnonzero(sc_alive)
    sc_t = sc_t_all[sc_refs]
    sc_h = sc_h_all[sc_refs]
    sc_cost = sc_cost_all[sc_refs]

    keep_f = ~(core_t & ~core_h)
    fwd = _build_search_csr(
        graph.node_count,
        np.concatenate([p[t[keep_f]], p[sc_t]]),
        np.concatenate([p[h[keep_f]], p[sc_h]]),
        np.concatenate([graph.costs[keep_f], sc_cost]),
        np.concatenate([arc_ids[keep_f], sc_refs]),
    )
    keep_b = ~(core_h & ~core_t)
    bwd = _build_search_csr(
        graph.node_count,
        np.concatenate([p[h[keep_b]], p[sc_h]]),
        np.concatenate([p[t[keep_b]], p[sc_t]]),
        np.concatenate([graph.costs[keep_b], sc_cost]),
        np.concatenate([arc_ids[keep_b], sc_refs]),
    )
    return fwd, bwd


def run_pipeline(
    graph: Graph,
    spec: CombineSpec,
    variant: str = "topocore-is",
    order_perm: Permutation | None = None,
    order_name: str = "input",
) -> CorePrep:
    """Full preprocessing on a cleaned, reordered graph.

    The graph should already be cleaned (one strongly connected
    component, no parallel arcs or self-loops) and carry the intended
    node order; ascending ids drive both the step-3 greedy iteration
    and the core-first partition, and a DFS pre-order is what makes
    them meaningful.  order_perm records how user node ids map to the
    graph passed here (identity when omitted).

    Saturating shortcut additions only warn; queries stay exact for
    inputs whose path sums fit the component width.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if spec.k != graph.k:
        raise ValueError(f"graph carries {graph.k} components, spec has {spec.k}")
    stats = PipelineStats(variant=variant)
    stats.input_nodes = graph.node_count
    stats.input_arcs = graph.arc_count
    timings = stats.timings

    t0 = time.perf_counter()
    bcc = biconnected_components(graph)
    stats.bcc_components = bcc.comp_count
    core = (
        bcc.largest_component_nodes()
        if bcc.comp_count
        else np.ones(graph.node_count, dtype=bool)
    )
    timings["bcc"] = time.perf_counter() - t0

    state = _CoreState(graph, spec)
    stats.core_nodes_step1 = int(core.sum())
    stats.core_arcs_step1 = state.alive_count(core)

    t0 = time.perf_counter()
    step2_remove_chains(state, core, stats)
    timings["chains"] = time.perf_counter() - t0
    stats.core_nodes_step2 = int(core.sum())
    stats.core_arcs_step2 = state.alive_count(core)

    t0 = time.perf_counter()
    if variant == "topocore-is":
        in_set = step3_independent_set(state, core)
        stats.is_set_size = int(in_set.sum())
        step3_contract(state, core, in_set)
    timings["contract"] = time.perf_counter() - t0

    stats.core_nodes_final = int(core.sum())
    stats.core_arcs_final = state.alive_count(core)
    stats.shortcut_count = state.shortcut_count
    stats.saturated_shortcuts = state.saturated_shortcuts
    t_fin, h_fin, _ = state.arrays()
    alive_fin = state.alive(core)
    deg_fin = (
        np.bincount(t_fin[alive_fin], minlength=graph.node_count)
        + np.bincount(h_fin[alive_fin], minlength=graph.node_count)
    )
    stats.core_deg3_final = int((core & (deg_fin == 3)).sum())
    if state.saturated_shortcuts:
        warnings.warn(
            f"{state.saturated_shortcuts} shortcut cost sums clipped at "
            f"{COMPONENT_MAX}; affected long routes may be inexact",
            RuntimeWarning,
            stacklevel=2,
        )

    t0 = time.perf_counter()
    perm = build_core_first_order(core)
    fwd, bwd = build_search_graphs(graph, core, state, perm)
    timings["assemble"] = time.perf_counter() - t0

    S = state.shortcut_count
    sc_t_all, sc_h_all, sc_cost_all = state.arrays()
    m = graph.arc_count
    unpack_first = np.zeros(S + 1, dtype=np.int64)
    if S:
        np.cumsum(
            np.asarray([len(u) for u in state.sc_unpack], dtype=np.int64),
            out=unpack_first[1:],
        )
        unpack_refs = np.concatenate(
            [np.asarray(u, dtype=np.int64) for u in state.sc_unpack]
        )
    else:
        unpack_refs = np.zeros(0, dtype=np.int64)
    n = graph.node_count
    return CorePrep(
        spec=spec,
        variant=variant,
        core_count=int(core.sum()),
        forward=fwd,
        backward=bwd,
        order_name=order_name,
        sc_tail=sc_t_all[m:],
        sc_head=sc_h_all[m:],
        sc_cost=sc_cost_all[m:] if S else np.zeros((0, spec.k), dtype=np.uint32),
        sc_unpack_first=unpack_first,
        sc_unpack_refs=unpack_refs,
        input_tail=graph.tails(),
        input_head=graph.head,
        perm=perm,
        order_perm=order_perm if order_perm is not None else Permutation.identity(n),
        stats=stats,
    )
