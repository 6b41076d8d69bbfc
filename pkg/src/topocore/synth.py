"""Synthetic cost tables, query workloads, and road-like test graphs.

Everything here is driven by numpy's default PCG64 generator with an
explicit seed and a fixed draw order, so outputs are identical across
runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from topocore.costs import COMPONENT_MAX, CombineSpec, CostTable, Objective
from topocore.graph import Graph, Permutation, build_graph_arrays

EARTH_RADIUS_M = 6371000.0

MODES = ("basic", "generalized")


def haversine_meters(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Great-circle distance in meters between degree coordinates."""
    lat1, lon1, lat2, lon2 = (np.radians(np.asarray(x, dtype=np.float64))
                              for x in (lat1, lon1, lat2, lon2))
    s1 = np.sin((lat2 - lat1) / 2.0)
    s2 = np.sin((lon2 - lon1) / 2.0)
    a = s1 * s1 + np.cos(lat1) * np.cos(lat2) * s2 * s2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def arc_lengths_meters(graph: Graph) -> np.ndarray:
    """Geodesic arc lengths, rounded half-up to integer meters."""
    if graph.coords is None:
        raise ValueError("graph has no coordinates")
    t = graph.tails()
    c = graph.coords
    d = haversine_meters(c[t, 0], c[t, 1], c[graph.head, 0], c[graph.head, 1])
    return np.floor(d + 0.5).astype(np.int64)


def synthesize_costs(graph: Graph, mode: str = "basic", seed: int = 0) -> CostTable:
    """Eight-component cost table from travel time and positions.

    Component 0 of the input graph is the travel time t; d is the
    geodesic arc length in meters.  basic (all additive): t, d,
    100t/d, 100d/t, 100/d, 100/t, 1, uniform [0, 100].  generalized:
    t, d, 100t/d, 100d/t additive, then four threshold components that
    draw a finite uniform [0, 100] value with probability exactly
    1/1000 each and are unbounded otherwise.  Divisions floor, with
    denominators clamped to 1 so zero-length or zero-time arcs never
    trap.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if graph.k < 1:
        raise ValueError("graph needs a travel-time component")
    rng = np.random.default_rng(seed)
    m = graph.arc_count
    t = graph.costs[:, 0].astype(np.int64)
    d = arc_lengths_meters(graph)
    td = np.maximum(t, 1)
    dd = np.maximum(d, 1)
    cols = [
        t,
        d,
        100 * t // dd,
        100 * d // td,
        100 // dd,
        100 // td,
    ]
    if mode == "basic":
        cols.append(np.ones(m, dtype=np.int64))
        cols.append(rng.integers(0, 101, m, dtype=np.int64))
        spec = CombineSpec.basic(8)
    else:
        cols = cols[:4]
        dice = rng.integers(0, 1000, (m, 4), dtype=np.int64)
        vals = rng.integers(0, 101, (m, 4), dtype=np.int64)
        thresholds = np.where(dice == 0, vals, np.int64(COMPONENT_MAX))
        cols.extend(thresholds.T)
        spec = CombineSpec.generalized()
    rows = np.minimum(np.stack(cols, axis=1), COMPONENT_MAX).astype(np.uint32)
    return CostTable(spec, rows)


# ---------------------------------------------------------------------------
# workloads


@dataclass(frozen=True)
class Workload:
    """Reproducible query set: (source, target, objective) triples."""

    queries: tuple[tuple[int, int, Objective], ...]
    seed: int
    mode: str

    def __post_init__(self):
        object.__setattr__(self, "queries", tuple(self.queries))


def generate_workload(
    graph: Graph, count: int, mode: str = "basic", seed: int = 0
) -> Workload:
    """Uniform node pairs with uniform [0, 100] objective entries.

    basic treats all eight entries as additive weights; generalized
    uses the first four as weights and the last four as vehicle
    values against the threshold components.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(seed)
    pairs = rng.integers(0, graph.node_count, size=(count, 2))
    entries = rng.integers(0, 101, size=(count, 8))
    queries = []
    for i in range(count):
        row = tuple(int(x) for x in entries[i])
        if mode == "basic":
            obj = Objective(add_weights=row, vehicle_values=(), required_bits=())
        else:
            obj = Objective(add_weights=row[:4], vehicle_values=row[4:], required_bits=())
        queries.append((int(pairs[i, 0]), int(pairs[i, 1]), obj))
    return Workload(queries=tuple(queries), seed=seed, mode=mode)


def permute_workload(workload: Workload, perm: Permutation) -> Workload:
    """Map every query's endpoints through a node permutation.

    Running the same seed against a reordered graph is equivalent to
    permuting the original workload, which keeps cross-order
    comparisons meaningful.
    """
    new_id = perm.new_id
    queries = tuple(
        (int(new_id[s]), int(new_id[t]), obj) for s, t, obj in workload.queries
    )
    return Workload(queries=queries, seed=workload.seed, mode=workload.mode)


# ---------------------------------------------------------------------------
# road-like grid instances


def grid_instance(
    rows: int,
    cols: int,
    seed: int = 0,
    *,
    segment_range: tuple[int, int] = (2, 10),
    tree_fraction: float = 0.2,
    tree_size_range: tuple[int, int] = (3, 9),
    spacing_deg: float = 0.009,
) -> Graph:
    """Bidirected grid with subdivided edges and dead-end trees.

    Intersections sit on a rows x cols lattice and keep node ids
    0..rows*cols-1; every lattice edge is split into a uniform number
    of segments from segment_range (so its interior becomes a
    two-neighbor chain), and a tree_fraction share of intersections
    grows a random dangling tree.  Arcs carry one travel-time
    component derived from segment length and a per-edge speed class;
    both directions of an edge share the same time.
    """
    if rows < 2 or cols < 2:
        raise ValueError("grid needs at least 2x2 intersections")
    lo, hi = segment_range
    if not (1 <= lo <= hi):
        raise ValueError("segment_range must be positive and ordered")
    rng = np.random.default_rng(seed)
    n_int = rows * cols

    # lattice edges, right then down, vectorized
    r, c = np.mgrid[0:rows, 0:cols]
    node = (r * cols + c).astype(np.int64)
    right_u = node[:, :-1].ravel()
    right_v = node[:, 1:].ravel()
    down_u = node[:-1, :].ravel()
    down_v = node[1:, :].ravel()
    eu = np.concatenate([right_u, down_u])
    ev = np.concatenate([right_v, down_v])
    E = len(eu)

    coords = np.empty((n_int, 2), dtype=np.float64)
    coords[:, 0] = 48.0 + r.ravel() * spacing_deg
    coords[:, 1] = 9.0 + c.ravel() * spacing_deg

    seg = rng.integers(lo, hi + 1, E, dtype=np.int64)
    speed = rng.choice(np.array([30.0, 50.0, 70.0, 90.0, 110.0]), E)

    inner = seg - 1
    inner_first = np.zeros(E + 1, dtype=np.int64)
    np.cumsum(inner, out=inner_first[1:])
    n_inner = int(inner_first[-1])

    # interior nodes interpolate between their edge's endpoints
    edge_of_inner = np.repeat(np.arange(E), inner)
    j_inner = np.arange(n_inner) - inner_first[edge_of_inner]
    frac = (j_inner + 1) / seg[edge_of_inner]
    inner_coords = (
        coords[eu[edge_of_inner]] * (1.0 - frac)[:, None]
        + coords[ev[edge_of_inner]] * frac[:, None]
    )

    # one directed arc per segment (forward); reverse added at the end
    total_seg = int(seg.sum())
    edge_of_seg = np.repeat(np.arange(E), seg)
    seg_first = np.zeros(E + 1, dtype=np.int64)
    np.cumsum(seg, out=seg_first[1:])
    j = np.arange(total_seg) - seg_first[edge_of_seg]
    base = n_int + inner_first[edge_of_seg]
    seg_tail = np.where(j == 0, eu[edge_of_seg], base + j - 1)
    seg_head = np.where(j == seg[edge_of_seg] - 1, ev[edge_of_seg], base + j)
    seg_speed = speed[edge_of_seg]

    # dangling trees on a sample of intersections
    tree_count = int(tree_fraction * n_int)
    roots = rng.choice(n_int, size=tree_count, replace=False)
    sizes = rng.integers(tree_size_range[0], tree_size_range[1] + 1, tree_count)
    tree_tail = []
    tree_head = []
    tree_coords = []
    next_id = n_int + n_inner
    for root, size in zip(roots, sizes):
        members = [int(root)]
        for _ in range(int(size)):
            parent = members[int(rng.integers(0, len(members)))]
            jitter = rng.uniform(-0.003, 0.003, 2)
            pc = coords[parent] if parent < n_int else tree_coords[parent - n_int - n_inner]
            tree_coords.append(pc + jitter)
            tree_tail.append(parent)
            tree_head.append(next_id)
            members.append(next_id)
            next_id += 1

    n = next_id
    all_coords = np.concatenate(
        [coords, inner_coords]
        + ([np.asarray(tree_coords)] if tree_coords else [])
    )
    tree_tail = np.asarray(tree_tail, dtype=np.int64)
    tree_head = np.asarray(tree_head, dtype=np.int64)
    fwd_tail = np.concatenate([seg_tail, tree_tail])
    fwd_head = np.concatenate([seg_head, tree_head])
    fwd_speed = np.concatenate([seg_speed, np.full(len(tree_tail), 30.0)])

    d = haversine_meters(
        all_coords[fwd_tail, 0], all_coords[fwd_tail, 1],
        all_coords[fwd_head, 0], all_coords[fwd_head, 1],
    )
    t = np.maximum(1, np.floor(d * 3.6 / fwd_speed + 0.5)).astype(np.int64)

    tail = np.concatenate([fwd_tail, fwd_head])
    head = np.concatenate([fwd_head, fwd_tail])
    tt = np.concatenate([t, t]).astype(np.uint32).reshape(-1, 1)
    return build_graph_arrays(n, tail, head, tt, coords=all_coords)
