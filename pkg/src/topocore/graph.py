"""Adjacency-array digraph with per-arc cost vectors.

Nodes are dense 0-based uint32 ids.  Arcs live in a single array
sorted by tail node; ``first_out[v]:first_out[v+1]`` slices the arcs
leaving ``v``.  Parallel arcs and asymmetric directions are allowed.
All structure arrays are frozen after construction; reordering and
cleanup return new graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


@dataclass(frozen=True)
class Graph:
    """Directed multigraph in adjacency-array form.

    Attributes:
        node_count: number of nodes, ids 0..node_count-1.
        first_out: uint32[node_count + 1] arc offsets, non-decreasing.
        head: uint32[arc_count] head node per arc, grouped by tail.
        costs: uint32[arc_count, k] cost vector per arc.
        coords: optional float64[node_count, 2] (latitude, longitude)
            in degrees.
    """

    node_count: int
    first_out: np.ndarray = field(repr=False)
    head: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)
    coords: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        first_out = np.ascontiguousarray(self.first_out, dtype=np.uint32)
        head = np.ascontiguousarray(self.head, dtype=np.uint32)
        costs = np.ascontiguousarray(self.costs, dtype=np.uint32)
        if first_out.shape != (self.node_count + 1,):
            raise ValueError("first_out must have node_count + 1 entries")
        if first_out[0] != 0 or first_out[-1] != len(head):
            raise ValueError("first_out must start at 0 and end at arc_count")
        if np.any(np.diff(first_out.astype(np.int64)) < 0):
            raise ValueError("first_out must be non-decreasing")
        if costs.ndim != 2 or costs.shape[0] != len(head):
            raise ValueError("costs must be an (arc_count, k) array")
        if len(head) and head.max(initial=0) >= self.node_count:
            raise ValueError("head contains an out-of-range node id")
        coords = self.coords
        if coords is not None:
            coords = np.ascontiguousarray(coords, dtype=np.float64)
            if coords.shape != (self.node_count, 2):
                raise ValueError("coords must be (node_count, 2)")
            coords.flags.writeable = False
        for a in (first_out, head, costs):
            a.flags.writeable = False
        object.__setattr__(self, "first_out", first_out)
        object.__setattr__(self, "head", head)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "coords", coords)

    @property
    def arc_count(self) -> int:
        return len(self.head)

    @property
    def k(self) -> int:
        return self.costs.shape[1]

    def tails(self) -> np.ndarray:
        """Tail node per arc, expanded from first_out."""
        return np.repeat(
            np.arange(self.node_count, dtype=np.uint32),
            np.diff(self.first_out.astype(np.int64)),
        )

    def out_arcs(self, v: int) -> range:
        return range(int(self.first_out[v]), int(self.first_out[v + 1]))

    def with_costs(self, rows: np.ndarray) -> "Graph":
        rows = np.ascontiguousarray(rows, dtype=np.uint32)
        if rows.shape[0] != self.arc_count:
            raise ValueError("cost row count must match arc count")
        return replace(self, costs=rows)

    def same_structure(self, other: "Graph") -> bool:
        return (
            self.node_count == other.node_count
            and np.array_equal(self.first_out, other.first_out)
            and np.array_equal(self.head, other.head)
        )


@dataclass(frozen=True)
class Permutation:
    """Node relabeling; new_id[old_id] gives the new id."""

    new_id: np.ndarray = field(repr=False)

    def __post_init__(self):
        new_id = np.ascontiguousarray(self.new_id, dtype=np.uint32)
        check = np.sort(new_id)
        if len(check) and not np.array_equal(check, np.arange(len(check), dtype=np.uint32)):
            raise ValueError("new_id is not a bijection on 0..n-1")
        new_id.flags.writeable = False
        object.__setattr__(self, "new_id", new_id)

    def __len__(self) -> int:
        return len(self.new_id)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.uint32))

    def inverse(self) -> "Permutation":
        inv = np.empty(len(self.new_id), dtype=np.uint32)
        inv[self.new_id] = np.arange(len(self.new_id), dtype=np.uint32)
        return Permutation(inv)

    def then(self, nxt: "Permutation") -> "Permutation":
        """Composition: apply self first, then nxt."""
        if len(nxt) != len(self):
            raise ValueError("permutation sizes differ")
        return Permutation(nxt.new_id[self.new_id])


def build_graph_arrays(
    node_count: int,
    tail: np.ndarray,
    head: np.ndarray,
    costs: np.ndarray,
    coords: np.ndarray | None = None,
) -> Graph:
    """Assemble a Graph from parallel arc arrays in any order.

    Arcs are stably sorted by tail, so arcs sharing a tail keep their
    input relative order.  Endpoints are validated against node_count.
    """
    tail = np.ascontiguousarray(tail, dtype=np.int64)
    head = np.ascontiguousarray(head, dtype=np.int64)
    costs = np.ascontiguousarray(costs, dtype=np.uint32)
    if tail.shape != head.shape or tail.ndim != 1:
        raise ValueError("tail and head must be matching 1-d arrays")
    if costs.ndim != 2 or costs.shape[0] != len(tail):
        raise ValueError("costs must be an (arc_count, k) array")
    for name, arr in (("tail", tail), ("head", head)):
        bad = np.nonzero((arr < 0) | (arr >= node_count))[0]
        if len(bad):
            i = int(bad[0])
            raise ValueError(
                f"arc {i}: {name} node {int(arr[i])} out of range 0..{node_count - 1}"
            )
    order = np.argsort(tail, kind="stable")
    counts = np.bincount(tail, minlength=node_count)
    first_out = np.zeros(node_count + 1, dtype=np.uint32)
    np.cumsum(counts, out=first_out[1:])
    return Graph(
        node_count=node_count,
        first_out=first_out,
        head=head[order].astype(np.uint32),
        costs=costs[order],
        coords=coords,
    )


def build_graph(node_count: int, arcs, k: int | None = None, coords=None) -> Graph:
    """Assemble a Graph from (tail, head, cost_vector) triples."""
    arcs = list(arcs)
    if k is None:
        if not arcs:
            raise ValueError("k is required for graphs without arcs")
        k = len(arcs[0][2])
    tail = np.asarray([a[0] for a in arcs], dtype=np.int64)
    head = np.asarray([a[1] for a in arcs], dtype=np.int64)
    costs = np.zeros((len(arcs), k), dtype=np.uint32)
    for i, (_, _, c) in enumerate(arcs):
        if len(c) != k:
            raise ValueError(f"arc {i}: cost vector has {len(c)} components, expected {k}")
        costs[i] = c
    if coords is not None:
        coords = np.asarray(coords, dtype=np.float64)
    return build_graph_arrays(node_count, tail, head, costs, coords)


def undirected_neighbors(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """CSR of distinct undirected neighbors per node, self-loops dropped.

    Returns (first, nbr) with neighbors of v in nbr[first[v]:first[v+1]],
    sorted ascending.
    """
    n = graph.node_count
    t = graph.tails().astype(np.int64)
    h = graph.head.astype(np.int64)
    keep = t != h
    u = np.concatenate([t[keep], h[keep]])
    v = np.concatenate([h[keep], t[keep]])
    keys = np.unique(u * np.int64(n) + v)
    src = keys // n
    nbr = (keys % n).astype(np.uint32)
    counts = np.bincount(src, minlength=n)
    first = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=first[1:])
    return first, nbr


def undirected_arc_adjacency(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """CSR over all incident arcs: out-arc heads then in-arc tails per node."""
    n = graph.node_count
    t = graph.tails().astype(np.int64)
    h = graph.head.astype(np.int64)
    m = graph.arc_count
    deg = np.bincount(t, minlength=n) + np.bincount(h, minlength=n)
    first = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=first[1:])
    nbr = np.empty(2 * m, dtype=np.uint32)
    out_deg = np.diff(graph.first_out.astype(np.int64))
    out_at = first[:-1]
    nbr_out_pos = np.repeat(out_at, out_deg) + _ramp(out_deg)
    nbr[nbr_out_pos] = graph.head
    in_order = np.argsort(h, kind="stable")
    in_deg = np.bincount(h, minlength=n)
    in_at = first[:-1] + out_deg
    nbr_in_pos = np.repeat(in_at, in_deg) + _ramp(in_deg)
    nbr[nbr_in_pos] = t[in_order].astype(np.uint32)
    return first, nbr


def _ramp(counts: np.ndarray) -> np.ndarray:
    """[0..c0-1, 0..c1-1, ...] for a vector of counts."""
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    starts = np.zeros(len(counts), dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    return np.arange(total, dtype=np.int64) - np.repeat(starts, counts)


def largest_scc_mask(graph: Graph) -> np.ndarray:
    """Nodes of the largest strongly connected component.

    Ties go to the component containing the smallest node id.
    """
    n = graph.node_count
    if n == 0:
        return np.zeros(0, dtype=bool)
    if graph.arc_count == 0:
        mask = np.zeros(n, dtype=bool)
        mask[0] = True
        return mask
    mat = csr_matrix(
        (
            np.ones(graph.arc_count, dtype=np.int8),
            graph.head.astype(np.int64),
            graph.first_out.astype(np.int64),
        ),
        shape=(n, n),
    )
    _, labels = connected_components(mat, directed=True, connection="strong")
    sizes = np.bincount(labels)
    best = sizes.max()
    # first node (smallest id) whose component has maximal size
    winner = labels[np.nonzero(sizes[labels] == best)[0][0]]
    return labels == winner


def cleanup(graph: Graph) -> Graph:
    """Restrict to the largest SCC and drop redundant arcs.

    Keeps the nodes of the largest strongly connected component
    (smallest-node-id component on ties) with ids compacted in
    ascending old-id order.  Self-loops are dropped; they can never
    shorten a route.  Parallel arcs collapse to the one with the
    lexicographically smallest cost vector (earliest input arc on
    ties), so any still-unknown objective keeps an optimal
    representative only when vectors are comparable; equal-tail arcs
    keep their input relative order.
    """
    mask = largest_scc_mask(graph)
    new_id = np.cumsum(mask) - 1
    t = graph.tails().astype(np.int64)
    h = graph.head.astype(np.int64)
    keep = mask[t] & mask[h] & (t != h)
    idx = np.nonzero(keep)[0]
    t, h = t[idx], h[idx]
    costs = graph.costs[idx]
    n_new = int(mask.sum())
    if len(idx):
        # lexicographic order: (tail, head, cost components, input index)
        keys = [np.arange(len(idx))]
        keys += [costs[:, i] for i in range(costs.shape[1] - 1, -1, -1)]
        keys += [h, t]
        order = np.lexsort(keys)
        ts, hs = t[order], h[order]
        group_start = np.ones(len(order), dtype=bool)
        group_start[1:] = (ts[1:] != ts[:-1]) | (hs[1:] != hs[:-1])
        survivors = np.sort(order[group_start])
        t, h, costs = t[survivors], h[survivors], costs[survivors]
    coords = graph.coords[mask] if graph.coords is not None else None
    return build_graph_arrays(n_new, new_id[t], new_id[h], costs, coords)


def dfs_preorder(graph: Graph, seed: int | None = None) -> Permutation:
    """Depth-first pre-order over the undirected view.

    The root is node 0, or a random node when a seed is given; further
    components restart at the smallest unvisited id.  Neighbors are
    visited in adjacency order (out-arcs first, then in-arcs).  Every
    non-root node is numbered after one of its neighbors.
    """
    from topocore._kernels import dfs_preorder_kernel

    n = graph.node_count
    if n == 0:
        return Permutation(np.zeros(0, dtype=np.uint32))
    first, nbr = undirected_arc_adjacency(graph)
    root = 0 if seed is None else int(np.random.default_rng(seed).integers(n))
    new_id = np.full(n, -1, dtype=np.int64)
    dfs_preorder_kernel(first, nbr, root, new_id)
    return Permutation(new_id.astype(np.uint32))


def random_order(graph: Graph, seed: int) -> Permutation:
    """Uniform random relabeling from a seeded PCG64 generator."""
    rng = np.random.default_rng(seed)
    return Permutation(rng.permutation(graph.node_count).astype(np.uint32))


def arc_permutation(graph: Graph, perm: Permutation) -> np.ndarray:
    """New position of each arc after apply_permutation."""
    new_tail = perm.new_id[graph.tails()].astype(np.int64)
    order = np.argsort(new_tail, kind="stable")
    arc_map = np.empty(graph.arc_count, dtype=np.int64)
    arc_map[order] = np.arange(graph.arc_count)
    return arc_map


def apply_permutation(graph: Graph, perm: Permutation) -> Graph:
    """Relabel nodes and regroup arcs by their new tails (stable)."""
    if len(perm) != graph.node_count:
        raise ValueError("permutation size must match node count")
    new_tail = perm.new_id[graph.tails()].astype(np.int64)
    new_head = perm.new_id[graph.head].astype(np.int64)
    coords = None
    if graph.coords is not None:
        coords = np.empty_like(graph.coords)
        coords[perm.new_id] = graph.coords
    return build_graph_arrays(graph.node_count, new_tail, new_head, graph.costs, coords)


def reverse_graph(graph: Graph) -> tuple[Graph, np.ndarray]:
    """Arc-reversed copy plus a map from reversed arc id to input arc id."""
    t = graph.tails().astype(np.int64)
    h = graph.head.astype(np.int64)
    order = np.argsort(h, kind="stable")
    counts = np.bincount(h, minlength=graph.node_count)
    first_out = np.zeros(graph.node_count + 1, dtype=np.uint32)
    np.cumsum(counts, out=first_out[1:])
    rev = Graph(
        node_count=graph.node_count,
        first_out=first_out,
        head=t[order].astype(np.uint32),
        costs=graph.costs[order],
        coords=graph.coords,
    )
    return rev, order


def degree_histogram(graph: Graph) -> dict[int, int]:
    """Count of nodes per undirected degree.

    Degree counts distinct neighbors, ignoring arc directions,
    multiplicities, and self-loops.
    """
    first, _ = undirected_neighbors(graph)
    deg = np.diff(first)
    hist = np.bincount(deg)
    return {int(d): int(c) for d, c in enumerate(hist) if c > 0}
