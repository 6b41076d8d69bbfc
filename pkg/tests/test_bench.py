"""Benchmark harness: gating, reports, TSV, cost padding."""

import numpy as np
import pytest

import topocore.bench as bench_mod
from topocore import (
    BenchMismatch,
    CombineSpec,
    CostTable,
    Objective,
    Op,
    cleanup,
    dijkstra_uni,
    generate_workload,
    grid_instance,
    parse_bench_tsv,
    run_benchmark,
    run_pipeline,
    synthesize_costs,
)
from topocore.bench import ENGINES, pad_cost_table, pad_workload
from topocore.search import QueryResult, SearchStats


@pytest.fixture(scope="module")
def small_instance():
    g = cleanup(grid_instance(4, 4, seed=40))
    table = synthesize_costs(g, "basic", seed=40)
    g8 = g.with_costs(table.rows)
    prep = run_pipeline(g8, table.spec, "topocore-is")
    wl = generate_workload(g8, 30, "basic", seed=41)
    return g8, table.spec, prep, wl


def test_run_benchmark_report_shape(small_instance):
    g8, spec, prep, wl = small_instance
    report, runs = run_benchmark(g8, spec, wl, prep=prep)
    assert [r.engine for r in report.rows] == list(ENGINES)
    by_name = {r.engine: r for r in report.rows}
    assert by_name["uni"].strategy == "-"
    assert by_name["bi-alt"].strategy == "alt"
    assert by_name["bilevel"].strategy == "mq"
    assert by_name["bilevel"].order == prep.order_name
    for r in report.rows:
        assert r.queries == len(wl.queries)
        assert r.mean_pops > 0
        assert r.mean_time_ms >= 0
        assert r.speedup is None or r.speedup > 0
    assert by_name["uni"].speedup == pytest.approx(1.0)
    # engines answered identical distances; runs expose them per query
    for run in runs[1:]:
        assert run.distances == runs[0].distances


def test_gate_refuses_report_on_mismatch(small_instance, monkeypatch):
    g8, spec, prep, wl = small_instance

    def lying_uni(graph, s, t, obj, sp, **kwargs):
        return QueryResult(12345, None, SearchStats(1, 1, 0.0))

    monkeypatch.setattr(bench_mod, "dijkstra_uni", lying_uni)
    with pytest.raises(BenchMismatch) as exc:
        run_benchmark(g8, spec, wl, engines=("uni", "bi-mq"))
    err = exc.value
    assert err.engine_a == "uni" and err.engine_b == "bi-mq"
    s, t, _ = wl.queries[err.index]
    assert (err.s, err.t) == (s, t)
    assert err.da == 12345
    assert "found" in str(err)


def test_tsv_round_trip_is_lossless(small_instance):
    g8, spec, prep, wl = small_instance
    report, _ = run_benchmark(g8, spec, wl, prep=prep)
    back = parse_bench_tsv(report.to_tsv())
    assert back == report


def test_deterministic_tsv_drops_timing_and_repeats(small_instance):
    g8, spec, prep, wl = small_instance
    r1, _ = run_benchmark(g8, spec, wl, prep=prep)
    r2, _ = run_benchmark(g8, spec, wl, prep=prep)
    det1, det2 = r1.deterministic_tsv(), r2.deterministic_tsv()
    assert det1 == det2
    header = det1.splitlines()[0].split("\t")
    assert "mean_time_ms" not in header and "speedup" not in header
    assert "mean_pops" in header
    # wall clock may differ, so only the deterministic view must match
    assert r1.to_tsv().splitlines()[0].split("\t").index("mean_time_ms") == 6


def test_parse_bench_tsv_rejects_garbage():
    with pytest.raises(ValueError, match="header"):
        parse_bench_tsv("nope\n")
    with pytest.raises(ValueError, match="header"):
        parse_bench_tsv("")
    good, _ = "\t".join(bench_mod.TSV_COLUMNS), None
    with pytest.raises(ValueError, match="cells"):
        parse_bench_tsv(good + "\nuni\tinput\n")


def test_empty_workload_reports_nothing(small_instance):
    g8, spec, prep, _ = small_instance
    wl = generate_workload(g8, 0, "basic", seed=1)
    report, runs = run_benchmark(g8, spec, wl, prep=prep)
    assert report.rows == ()
    assert runs == []


def test_workers_match_serial_results(small_instance):
    g8, spec, prep, wl = small_instance
    r1, runs1 = run_benchmark(g8, spec, wl, prep=prep, workers=1)
    r4, runs4 = run_benchmark(g8, spec, wl, prep=prep, workers=4)
    assert r1.deterministic_tsv() == r4.deterministic_tsv()
    for a, b in zip(runs1, runs4):
        assert a.distances == b.distances
        assert np.array_equal(a.pops, b.pops)


def test_run_benchmark_validates_engines_and_prep(small_instance):
    g8, spec, prep, wl = small_instance
    with pytest.raises(ValueError, match="unknown engine"):
        run_benchmark(g8, spec, wl, engines=("warp",))
    with pytest.raises(ValueError, match="needs a prep"):
        run_benchmark(g8, spec, wl, engines=("bilevel",))
    other_spec = CombineSpec.basic(2)
    with pytest.raises(ValueError, match="different component layout"):
        run_benchmark(
            g8.with_costs(g8.costs[:, :2]), other_spec,
            generate_workload(g8, 1, seed=1), engines=("bilevel",), prep=prep,
        )


def test_pad_cost_table_extends_components(small_instance):
    g8, spec, _, wl = small_instance
    table = CostTable(spec, g8.costs)
    padded = pad_cost_table(table, 12, seed=5)
    assert padded.spec.k == 12
    assert padded.spec.ops[8:] == (Op.ADD,) * 4
    assert np.array_equal(padded.rows[:, :8], table.rows)
    assert padded.rows[:, 8:].max() <= 100
    again = pad_cost_table(table, 12, seed=5)
    assert np.array_equal(again.rows, padded.rows)
    assert pad_cost_table(table, 8, seed=5) is table
    with pytest.raises(ValueError, match="pad"):
        pad_cost_table(table, 4, seed=5)


def test_pad_workload_extends_weights(small_instance):
    g8, spec, _, wl = small_instance
    padded = pad_workload(wl, 8, 12, seed=5)
    for (s, t, obj), (sp, tp, objp) in zip(wl.queries, padded.queries):
        assert (s, t) == (sp, tp)
        assert objp.add_weights[:8] == obj.add_weights
        assert len(objp.add_weights) == 12
        assert all(0 <= w <= 100 for w in objp.add_weights[8:])
    with pytest.raises(ValueError, match="pad"):
        pad_workload(wl, 8, 6, seed=5)
    assert pad_workload(wl, 8, 8, seed=5) is wl


def test_zero_padding_preserves_distances(small_instance):
    # a padded instance with zero extra weights must answer like the
    # original: the new components never contribute
    g8, spec, _, wl = small_instance
    table = CostTable(spec, g8.costs)
    padded = pad_cost_table(table, 10, seed=6)
    g10 = g8.with_costs(padded.rows)
    for s, t, obj in wl.queries[:10]:
        obj10 = Objective(obj.add_weights + (0, 0))
        want = dijkstra_uni(g8, s, t, obj, spec).distance
        got = dijkstra_uni(g10, s, t, obj10, padded.spec).distance
        assert got == want


def test_padded_benchmark_still_gates(small_instance):
    g8, spec, _, wl = small_instance
    table = pad_cost_table(CostTable(spec, g8.costs), 10, seed=7)
    g10 = g8.with_costs(table.rows)
    wl10 = pad_workload(wl, 8, 10, seed=7)
    prep10 = run_pipeline(g10, table.spec, "topocore-is")
    report, _ = run_benchmark(g10, table.spec, wl10, prep=prep10)
    assert {r.engine for r in report.rows} == set(ENGINES)
