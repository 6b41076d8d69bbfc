"""Synthetic instances: geodesic lengths, cost columns, workloads, grids."""

import math

import numpy as np
import pytest

from topocore import (
    COMPONENT_MAX,
    CombineSpec,
    Objective,
    Op,
    build_graph,
    build_graph_arrays,
    cleanup,
    dijkstra_uni,
    generate_workload,
    grid_instance,
    haversine_meters,
    permute_workload,
    synthesize_costs,
)
from topocore.graph import apply_permutation, degree_histogram, random_order
from topocore.synth import EARTH_RADIUS_M, Workload, arc_lengths_meters

DEG_PER_METER = math.degrees(1.0 / EARTH_RADIUS_M)


def test_haversine_known_values():
    # one degree of latitude is R * pi / 180 everywhere
    want = EARTH_RADIUS_M * math.pi / 180.0
    got = haversine_meters(
        np.array([0.0]), np.array([10.0]), np.array([1.0]), np.array([10.0])
    )
    assert got[0] == pytest.approx(want, rel=1e-12)
    assert haversine_meters(
        np.array([51.0]), np.array([7.0]), np.array([51.0]), np.array([7.0])
    )[0] == 0.0
    # antipodal points sit half a circumference apart
    anti = haversine_meters(np.array([0.0]), np.array([0.0]), np.array([0.0]), np.array([180.0]))
    assert anti[0] == pytest.approx(EARTH_RADIUS_M * math.pi, rel=1e-12)


def test_haversine_symmetry():
    rng = np.random.default_rng(2)
    lat1, lat2 = rng.uniform(-89, 89, 50), rng.uniform(-89, 89, 50)
    lon1, lon2 = rng.uniform(-179, 179, 50), rng.uniform(-179, 179, 50)
    assert np.allclose(
        haversine_meters(lat1, lon1, lat2, lon2),
        haversine_meters(lat2, lon2, lat1, lon1),
    )


def two_node_graph(t_value, meters):
    coords = np.array([[0.0, 0.0], [meters * DEG_PER_METER, 0.0]])
    return build_graph(2, [(0, 1, (t_value,))], coords=coords)


def test_arc_lengths_round_half_up():
    g = two_node_graph(10, 20.0)
    assert list(arc_lengths_meters(g)) == [20]
    assert list(arc_lengths_meters(two_node_graph(1, 20.6))) == [21]
    assert list(arc_lengths_meters(two_node_graph(1, 20.4))) == [20]


def test_basic_cost_columns():
    g = two_node_graph(10, 20.0)
    table = synthesize_costs(g, "basic", seed=5)
    assert table.spec == CombineSpec.basic(8)
    row = [int(x) for x in table.rows[0]]
    assert row[0] == 10  # travel time copied from component 0
    assert row[1] == 20  # geodesic length
    assert row[2] == 50  # 100 * 10 // 20
    assert row[3] == 200  # 100 * 20 // 10
    assert row[4] == 5  # 100 // 20
    assert row[5] == 10  # 100 // 10
    assert row[6] == 1
    assert 0 <= row[7] <= 100


def test_basic_costs_clamp_zero_denominators():
    g = build_graph(2, [(0, 1, (0,))], coords=np.zeros((2, 2)))
    row = [int(x) for x in synthesize_costs(g, "basic").rows[0]]
    assert row[0] == 0 and row[1] == 0
    assert row[2] == 0  # 100 * 0 // 1
    assert row[3] == 0
    assert row[4] == 100  # 100 // max(0, 1)
    assert row[5] == 100


def test_synthesize_costs_deterministic_and_mode_checked():
    g = two_node_graph(10, 20.0)
    a = synthesize_costs(g, "basic", seed=9)
    b = synthesize_costs(g, "basic", seed=9)
    assert np.array_equal(a.rows, b.rows)
    assert not np.array_equal(a.rows, synthesize_costs(g, "basic", seed=10).rows)
    with pytest.raises(ValueError, match="mode"):
        synthesize_costs(g, "fancy")


def test_generalized_threshold_dice_rate():
    # a ring with > 10^6 arcs; each threshold component draws a finite
    # value with probability 1/1000, so counts stay within 5 sigma
    n = 1_050_000
    rng = np.random.default_rng(0)
    tails = np.arange(n, dtype=np.int64)
    heads = np.roll(tails, -1)
    costs = rng.integers(1, 100, size=(n, 1)).astype(np.uint32)
    coords = np.column_stack([rng.uniform(0, 0.5, n), rng.uniform(0, 0.5, n)])
    g = build_graph_arrays(n, tails, heads, costs, coords)
    table = synthesize_costs(g, "generalized", seed=123)
    assert table.spec == CombineSpec.generalized()
    mean = n / 1000.0
    slack = 5.0 * math.sqrt(n * 0.001 * 0.999)
    for comp in range(4, 8):
        col = table.rows[:, comp]
        finite = col != COMPONENT_MAX
        count = int(finite.sum())
        assert abs(count - mean) <= slack, (comp, count)
        assert col[finite].max(initial=0) <= 100
    # additive part matches the basic formulas
    d = arc_lengths_meters(g)
    t = g.costs[:, 0].astype(np.int64)
    assert np.array_equal(table.rows[:, 0], t.astype(np.uint32))
    assert np.array_equal(
        table.rows[:, 2].astype(np.int64), 100 * t // np.maximum(d, 1)
    )


def test_workload_single_node_graph():
    g = build_graph(1, [], k=8)
    wl = generate_workload(g, 1, "basic", seed=3)
    (s, t, obj), = wl.queries
    assert (s, t) == (0, 0)
    assert len(obj.add_weights) == 8
    assert all(0 <= w <= 100 for w in obj.add_weights)


def test_workload_modes_and_validation():
    g = build_graph(4, [(0, 1, (1,) * 8)], k=8)
    basic = generate_workload(g, 5, "basic", seed=1)
    assert basic.mode == "basic"
    for s, t, obj in basic.queries:
        assert 0 <= s < 4 and 0 <= t < 4
        assert len(obj.add_weights) == 8
        assert obj.vehicle_values == () and obj.required_bits == ()
    gen = generate_workload(g, 5, "generalized", seed=1)
    for _, _, obj in gen.queries:
        assert len(obj.add_weights) == 4
        assert len(obj.vehicle_values) == 4
    assert generate_workload(g, 5, "basic", seed=1) == basic
    with pytest.raises(ValueError, match="mode"):
        generate_workload(g, 5, "nope")
    with pytest.raises(ValueError, match="count"):
        generate_workload(g, -1)
    assert generate_workload(g, 0).queries == ()


def test_permuted_workload_matches_reordered_graph():
    g = cleanup(grid_instance(3, 3, seed=6))
    table = synthesize_costs(g, "basic", seed=6)
    g8 = g.with_costs(table.rows)
    wl = generate_workload(g8, 12, "basic", seed=7)
    perm = random_order(g8, 8)
    g8p = apply_permutation(g8, perm)
    wlp = permute_workload(wl, perm)
    assert wlp.seed == wl.seed and wlp.mode == wl.mode
    for (s, t, obj), (sp, tp, objp) in zip(wl.queries, wlp.queries):
        assert sp == int(perm.new_id[s]) and tp == int(perm.new_id[t])
        assert objp == obj
        want = dijkstra_uni(g8, s, t, obj, table.spec).distance
        got = dijkstra_uni(g8p, sp, tp, obj, table.spec).distance
        assert got == want


def test_grid_instance_shape():
    g = grid_instance(4, 5, seed=11)
    assert g.k == 1
    assert g.coords is not None
    # intersections keep the first rows*cols ids on the spacing lattice
    lattice = g.coords[:20]
    base_lat, base_lon = lattice[0]
    want = np.array(
        [[base_lat + r * 0.009, base_lon + c * 0.009] for r in range(4) for c in range(5)]
    )
    assert np.allclose(lattice, want, atol=1e-9)
    assert g.node_count > 20
    assert (g.costs[:, 0] >= 1).all()
    # arcs come in both directions with equal travel time
    fwd = {(int(t), int(h)): int(c) for t, h, c in zip(g.tails(), g.head, g.costs[:, 0])}
    for (t, h), c in fwd.items():
        assert fwd[(h, t)] == c
    # everything is reachable: cleanup drops nothing
    assert cleanup(g).node_count == g.node_count
    hist = degree_histogram(g)
    assert hist.get(1, 0) > 0  # dead-end leaves
    assert hist.get(2, 0) > hist.get(4, 0) / 2  # subdivision interiors dominate


def test_grid_instance_deterministic():
    a = grid_instance(3, 4, seed=2)
    b = grid_instance(3, 4, seed=2)
    assert a.node_count == b.node_count
    assert np.array_equal(a.head, b.head)
    assert np.array_equal(a.costs, b.costs)
    assert np.array_equal(a.coords, b.coords)
    c = grid_instance(3, 4, seed=3)
    assert a.node_count != c.node_count or not np.array_equal(a.head, c.head)


def test_workload_is_frozen():
    wl = Workload(queries=((0, 0, Objective((1,) * 8)),), seed=1, mode="basic")
    with pytest.raises(AttributeError):
        wl.seed = 2
