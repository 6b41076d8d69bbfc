"""End-to-end tests for the command-line surface.

Everything goes through main(argv) with real files in tmp dirs.  The
hand-checked instance is a bidirected diamond where the cheapest 0->3
route threads the 0-2-3 corner (15 + 1 = 16), beating both the direct
arc (25) and the 0-1-3 side (20).
"""

import pytest

from topocore import bench as bench_mod
from topocore import fileio, synth
from topocore.cli import build_parser, main
from topocore.graph import cleanup
from topocore.search import QueryResult, SearchStats

# file arcs are 1-based; cleaned ids are 0-based (one SCC, so identity)
DIAMOND_ARCS = [
    (1, 2, (10,)), (2, 1, (10,)),
    (2, 4, (10,)), (4, 2, (10,)),
    (1, 3, (15,)), (3, 1, (15,)),
    (3, 4, (1,)), (4, 3, (1,)),
    (1, 4, (25,)), (4, 1, (25,)),
]

# same shape, direct arc is cheapest but lacks the access bit
RESTRICTED_ARCS = [
    (1, 2, (10, 1)), (2, 1, (10, 1)),
    (2, 4, (10, 1)), (4, 2, (10, 1)),
    (1, 3, (15, 1)), (3, 1, (15, 1)),
    (3, 4, (1, 1)), (4, 3, (1, 1)),
    (1, 4, (5, 0)), (4, 1, (5, 0)),
]


def write_instance(tmp, name, n, arcs, roles):
    gr = tmp / f"{name}.gr"
    lines = [f"p sp {n} {len(arcs)}"]
    lines += [f"a {t} {h} {c[0]}" for t, h, c in arcs]
    gr.write_text("\n".join(lines) + "\n", encoding="ascii")
    cf = tmp / f"{name}.costs"
    k = len(roles.split())
    rows = "\n".join(" ".join(str(x) for x in c) for _, _, c in arcs)
    cf.write_text(f"costs {k} {len(arcs)} {roles}\n{rows}\n", encoding="ascii")
    return str(gr), str(cf)


@pytest.fixture(scope="module")
def diamond(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli_diamond")
    gr, costs = write_instance(tmp, "diamond", 4, DIAMOND_ARCS, "add")
    prep = str(tmp / "diamond.prep")
    assert main(["preprocess", gr, costs, prep]) == 0
    return {"gr": gr, "costs": costs, "prep": prep}


@pytest.fixture(scope="module")
def grid_files(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli_grid")
    graph = cleanup(synth.grid_instance(4, 4, seed=40))
    table = synth.synthesize_costs(graph, "basic", seed=41)
    graph = graph.with_costs(table.rows)
    gr, co, costs = str(tmp / "g.gr"), str(tmp / "g.co"), str(tmp / "g.costs")
    fileio.write_dimacs(graph, gr, co)
    fileio.write_cost_file(table, costs)
    prep = str(tmp / "g.prep")
    assert main(["preprocess", gr, costs, prep, "--co", co]) == 0
    return {"gr": gr, "co": co, "costs": costs, "prep": prep}


# ---------------------------------------------------------------------------
# stats


def test_stats_degree_distribution(tmp_path, capsys):
    arcs = [(1, 2, (1,)), (2, 1, (1,)), (2, 3, (1,)), (3, 2, (1,))]
    gr, _ = write_instance(tmp_path, "path3", 3, arcs, "add")
    assert main(["stats", gr]) == 0
    assert capsys.readouterr().out == (
        "3 nodes, 4 arcs\n"
        "degree 1: 66.7%\n"
        "degree 2: 33.3%\n"
        "degree 3: 0.0%\n"
        "degree 4: 0.0%\n"
        "degree 5+: 0.0%\n"
    )


def test_stats_missing_file_exits_1(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "nope.gr")]) == 1
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# preprocess


def test_preprocess_reports_and_saves(tmp_path, capsys):
    gr, costs = write_instance(tmp_path, "d", 4, DIAMOND_ARCS, "add")
    out_path = str(tmp_path / "d.prep")
    assert main(["preprocess", gr, costs, out_path]) == 0
    out = capsys.readouterr().out
    assert "input: 4 nodes, 10 arcs" in out
    assert "(100.0% of nodes)" in out
    # the 0-1-3 and 0-2-3 corners are two-neighbor chains
    assert "after chain bypass: 2 nodes (50.0%)" in out
    assert "shortcuts: 4 " in out
    assert f"wrote {out_path}" in out
    prep = fileio.load_prep(out_path)
    assert prep.variant == "topocore-is"
    assert prep.node_count == 4
    assert prep.shortcut_count == 4


def test_preprocess_plain_variant_skips_contraction(tmp_path, capsys):
    gr, costs = write_instance(tmp_path, "d", 4, DIAMOND_ARCS, "add")
    out_path = str(tmp_path / "d.prep")
    assert main(["preprocess", gr, costs, out_path, "--variant", "topocore"]) == 0
    out = capsys.readouterr().out
    assert "after degree-3 contraction" not in out
    assert fileio.load_prep(out_path).variant == "topocore"


def test_preprocess_random_order_same_answers(tmp_path, diamond, capsys):
    prep2 = str(tmp_path / "r.prep")
    assert main(["preprocess", diamond["gr"], diamond["costs"], prep2,
                 "--order", "random", "--seed", "5"]) == 0
    capsys.readouterr()
    for s, t in [(0, 3), (3, 1), (2, 0), (1, 2)]:
        outs = []
        for prep in (diamond["prep"], prep2):
            assert main(["query", prep, "--source", str(s),
                         "--target", str(t), "--weights", "1"]) == 0
            outs.append(capsys.readouterr().out)
        assert outs[0] == outs[1]


# ---------------------------------------------------------------------------
# query


def test_query_hand_checked_distance_and_path(diamond, capsys):
    assert main(["query", diamond["prep"], "--source", "0", "--target", "3",
                 "--weights", "1", "--path"]) == 0
    assert capsys.readouterr().out == "16\n0 2 3\n"


def test_query_source_equals_target(diamond, capsys):
    assert main(["query", diamond["prep"], "--source", "2", "--target", "2",
                 "--weights", "1"]) == 0
    assert capsys.readouterr().out == "0\n"


def test_query_defaults_fill_zero_entries(diamond, capsys):
    # no --weights at all: the zero objective prices every arc at 0
    assert main(["query", diamond["prep"], "--source", "0",
                 "--target", "3"]) == 0
    assert capsys.readouterr().out == "0\n"


def test_query_required_bits_reroute_and_ban(tmp_path, capsys):
    gr, costs = write_instance(tmp_path, "rd", 4, RESTRICTED_ARCS, "add and")
    prep = str(tmp_path / "rd.prep")
    assert main(["preprocess", gr, costs, prep]) == 0
    capsys.readouterr()
    for bits, want in [("0", "5\n"), ("1", "16\n"), ("2", "inf\n")]:
        assert main(["query", prep, "--source", "0", "--target", "3",
                     "--weights", "1", "--bits", bits]) == 0
        assert capsys.readouterr().out == want


def test_query_weights_count_usage_error(diamond, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["query", diamond["prep"], "--source", "0", "--target", "3",
              "--weights", "1", "2"])
    assert exc.value.code == 2
    assert "usage error: --weights needs 1 values" in capsys.readouterr().err


def test_query_endpoint_out_of_range(diamond, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["query", diamond["prep"], "--source", "99", "--target", "0"])
    assert exc.value.code == 2
    assert "source 99 out of range 0..3" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# bench


def test_bench_tsv_to_stdout(grid_files, capsys):
    assert main(["bench", grid_files["gr"], grid_files["costs"],
                 "--co", grid_files["co"], "--prep", grid_files["prep"],
                 "--queries", "25", "--seed", "3",
                 "--engines", "uni,bi-mq,bilevel", "--tsv", "-"]) == 0
    out = capsys.readouterr().out
    report = bench_mod.parse_bench_tsv(out[out.index("engine\t"):])
    assert [r.engine for r in report.rows] == ["uni", "bi-mq", "bilevel"]
    assert all(r.queries == 25 for r in report.rows)
    assert report.rows[0].speedup == pytest.approx(1.0)


def test_bench_workers_match_serial(grid_files, tmp_path, capsys):
    base = ["bench", grid_files["gr"], grid_files["costs"],
            "--prep", grid_files["prep"], "--queries", "20", "--seed", "9",
            "--engines", "uni,bilevel"]
    t1, t2 = str(tmp_path / "a.tsv"), str(tmp_path / "b.tsv")
    assert main(base + ["--workers", "1", "--tsv", t1]) == 0
    assert main(base + ["--workers", "2", "--tsv", t2]) == 0
    capsys.readouterr()
    with open(t1, encoding="ascii") as f:
        r1 = bench_mod.parse_bench_tsv(f.read())
    with open(t2, encoding="ascii") as f:
        r2 = bench_mod.parse_bench_tsv(f.read())
    assert r1.deterministic_tsv() == r2.deterministic_tsv()


def test_bench_pad_costs(grid_files, capsys):
    assert main(["bench", grid_files["gr"], grid_files["costs"],
                 "--prep", grid_files["prep"], "--queries", "10",
                 "--seed", "5", "--engines", "uni,bilevel",
                 "--pad-costs", "12", "--tsv", "-"]) == 0
    out = capsys.readouterr().out
    report = bench_mod.parse_bench_tsv(out[out.index("engine\t"):])
    assert [r.engine for r in report.rows] == ["uni", "bilevel"]


def test_bench_rejects_mode_layout_mismatch(diamond, capsys):
    # the diamond table is a single add component; basic needs eight
    with pytest.raises(SystemExit) as exc:
        main(["bench", diamond["gr"], diamond["costs"],
              "--engines", "uni", "--queries", "5"])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert "mode basic needs 8 add / 0 min / 0 and components" in err
    assert "cost table has 1/0/0" in err


def test_bench_bilevel_requires_prep(grid_files, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bench", grid_files["gr"], grid_files["costs"],
              "--engines", "uni,bilevel", "--queries", "5"])
    assert exc.value.code == 2
    assert "usage error: --prep is required" in capsys.readouterr().err


def test_bench_gate_failure_exits_1(grid_files, capsys, monkeypatch):
    def liar(graph, spec, s, t, objective, state=None, want_path=False):
        return QueryResult(12345, None, SearchStats(1, 1, 0.0))

    monkeypatch.setattr(bench_mod, "dijkstra_uni", liar)
    assert main(["bench", grid_files["gr"], grid_files["costs"],
                 "--engines", "uni,bi-mq", "--queries", "5",
                 "--seed", "2"]) == 1
    assert "correctness gate failed" in capsys.readouterr().err


def test_cost_row_count_mismatch_exits_1(tmp_path, capsys):
    gr, _ = write_instance(tmp_path, "d", 4, DIAMOND_ARCS, "add")
    bad = tmp_path / "bad.costs"
    rows = "\n".join(str(c[0]) for _, _, c in DIAMOND_ARCS[:9])
    bad.write_text(f"costs 1 9 add\n{rows}\n", encoding="ascii")
    assert main(["preprocess", gr, str(bad), str(tmp_path / "x.prep")]) == 1
    assert "cost file has 9 rows, graph has 10 arcs" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# defaults


def test_seed_env_default(monkeypatch):
    monkeypatch.setenv("TOPOCORE_SEED", "7")
    assert build_parser().parse_args(["preprocess", "a", "b", "c"]).seed == 7
    assert build_parser().parse_args(["bench", "a", "b"]).seed == 7
    monkeypatch.delenv("TOPOCORE_SEED")
    assert build_parser().parse_args(["preprocess", "a", "b", "c"]).seed == 0
