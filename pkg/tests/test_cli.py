"""Exit codes, JSON shapes, and validator behavior of the command line."""

import json

import pytest

from ipdr.cli import main

from oracles import pebbling_successors

CHAIN2_DAG = """\
node a
node b
edge a b
output b
"""

CHAIN3_DAG = """\
node a
node b
node c
edge a b
edge b c
output c
"""

RELAXING_SYS = """\
var a
var b
init 00
edge 00 01
group 1 01 10
group 2 10 11
bad 11
direction relaxing
"""

CONSTRAINING_SYS = RELAXING_SYS.replace("relaxing", "constraining")

SINGLE_SAFE_SYS = """\
var a
init 0
edge 0 0
bad 1
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def chain3(tmp_path):
    p = tmp_path / "chain3.dag"
    p.write_text(CHAIN3_DAG)
    return str(p)


# --- solve -------------------------------------------------------------------------


def test_solve_relaxing_family_violated(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(RELAXING_SYS)
    code, doc = run(capsys, "solve", str(f))
    assert code == 1
    assert doc["result"] == "violated"
    assert doc["instance"] == "2"
    assert doc["trace"]["states"] == ["00", "01", "10", "11"]
    assert [r["verdict"] for r in doc["stats"]] == [
        "invariant", "invariant", "trace",
    ]


def test_solve_constraining_family_holds(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(CONSTRAINING_SYS)
    code, doc = run(capsys, "solve", str(f))
    assert code == 0
    assert doc["result"] == "holds"
    assert doc["instance"] == "1"
    assert doc["invariant"]["clauses"]
    assert [r["verdict"] for r in doc["stats"]] == ["trace", "invariant"]


def test_solve_single_system_defaults_to_naive(capsys, tmp_path):
    f = tmp_path / "one.sys"
    f.write_text(SINGLE_SAFE_SYS)
    code, doc = run(capsys, "solve", str(f))
    assert code == 0
    assert doc["problem"]["kind"] == "system"
    assert doc["problem"]["strategy"] == "naive"


def test_solve_malformed_file(capsys, tmp_path):
    f = tmp_path / "bad.sys"
    f.write_text("var a\nfrobnicate 00\n")
    code, doc = run(capsys, "solve", str(f))
    assert code == 2
    assert doc is None


def test_solve_rejects_binary(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(RELAXING_SYS)
    code, _ = run(capsys, "solve", str(f), "--strategy", "binary")
    assert code == 2


def test_solve_output_file_matches_stdout(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(RELAXING_SYS)
    out = tmp_path / "verdict.json"
    _, doc = run(capsys, "solve", str(f), "--output", str(out))
    assert json.loads(out.read_text()) == doc


# --- pebble ------------------------------------------------------------------------


def test_pebble_binary_chain3(capsys, chain3):
    code, doc = run(capsys, "pebble", chain3, "--pebbles", "1..3")
    assert code == 0
    assert doc["result"] == "optimum"
    assert doc["optimum"] == 3
    assert doc["impossibility_level"] == 2
    assert doc["trace_instance"] == "p3"
    assert doc["invariant_instance"] == "p2"
    assert doc["schedule"]["max_pebbles"] == 3


def test_pebble_schedule_obeys_game_rule(capsys, chain3):
    _, doc = run(capsys, "pebble", chain3)
    preds = {"a": set(), "b": {"a"}, "c": {"b"}}
    cfg = frozenset()
    for step in doc["schedule"]["steps"]:
        flips = set(step["place"]) | set(step["remove"])
        nxt = (cfg | set(step["place"])) - set(step["remove"])
        assert frozenset(nxt) in pebbling_successors(
            ("a", "b", "c"), preds, doc["optimum"]
        )(cfg), step
        cfg = frozenset(nxt)
    assert "c" in cfg


def test_pebble_constrain_sweep(capsys, tmp_path):
    p = tmp_path / "chain2.dag"
    p.write_text(CHAIN2_DAG)
    code, doc = run(capsys, "pebble", str(p), "--strategy", "constrain")
    assert code == 0
    assert doc["optimum"] == 2
    assert doc["impossibility_level"] == 1
    assert doc["trace_instance"] == "p2"
    # descending sweep: violated at 2, then proved impossible at 1
    assert [(r["instance"], r["verdict"]) for r in doc["stats"]] == [
        ("p2", "trace"), ("p1", "invariant"),
    ]


@pytest.mark.parametrize("strategy", ["relax", "naive"])
def test_pebble_linear_sweeps(capsys, chain3, strategy):
    code, doc = run(capsys, "pebble", chain3, "--strategy", strategy)
    assert code == 0
    assert doc["optimum"] == 3
    assert doc["impossibility_level"] == 2
    assert doc["schedule"]["max_pebbles"] == 3


def test_pebble_range_below_optimum(capsys, chain3):
    code, doc = run(capsys, "pebble", chain3, "--pebbles", "1..2")
    assert code == 1
    assert doc["result"] == "no-strategy"
    assert doc["optimum"] is None
    assert doc["impossibility_level"] == 2
    assert "schedule" not in doc


def test_pebble_bad_range(capsys, chain3):
    code, _ = run(capsys, "pebble", chain3, "--pebbles", "2..x")
    assert code == 2


def test_pebble_frontier_cap_is_unknown(capsys, chain3):
    code, doc = run(capsys, "pebble", chain3, "--max-k", "1", "--pebbles", "3")
    assert code == 2
    assert doc["result"] == "unknown"


# --- peterson ----------------------------------------------------------------------


def test_peterson_two_procs_safe(capsys):
    code, doc = run(capsys, "peterson", "--procs", "2", "--switches", "3")
    assert code == 0
    assert doc["result"] == "holds"
    assert doc["instance"] == "l3"
    assert len(doc["stats"]) == 4  # bounds 0..3


def test_peterson_broken_lock_traces(capsys):
    code, doc = run(
        capsys, "peterson", "--procs", "2", "--switches", "3",
        "--remove-wait-condition",
    )
    assert code == 1
    assert doc["result"] == "violated"
    assert doc["instance"] == "l1"
    last = doc["interleaving"][-1]
    crits = [k for k, v in last.items()
             if k.startswith("p") and str(v).startswith("crit")]
    assert len(crits) >= 2
    assert last["switches"] == 1


def test_peterson_one_proc_is_usage_error(capsys):
    code, doc = run(capsys, "peterson", "--procs", "1", "--switches", "2")
    assert code == 2
    assert doc is None


def test_peterson_rejects_constrain(capsys):
    code, _ = run(capsys, "peterson", "--procs", "2", "--switches", "1",
                  "--strategy", "constrain")
    assert code == 2


# --- validate ----------------------------------------------------------------------


def _emit_verdict(capsys, tmp_path, *argv):
    out = tmp_path / "verdict.json"
    code, doc = run(capsys, *argv, "--output", str(out))
    return code, doc, out


def test_validate_trace_roundtrip(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(RELAXING_SYS)
    _, _, out = _emit_verdict(capsys, tmp_path, "solve", str(f))
    code, doc = run(capsys, "validate", str(out))
    assert code == 0
    assert doc["valid"] is True
    assert set(doc["checks"]) == {"trace-initial", "trace-steps", "trace-final"}


def test_validate_invariant_roundtrip(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(CONSTRAINING_SYS)
    _, _, out = _emit_verdict(capsys, tmp_path, "solve", str(f))
    code, doc = run(capsys, "validate", str(out))
    assert code == 0
    assert doc["valid"] is True
    assert set(doc["checks"]) == {
        "invariant-initiation", "invariant-consecution", "invariant-safety",
    }


def test_validate_pebble_verdict_checks_both(capsys, tmp_path, chain3):
    _, _, out = _emit_verdict(capsys, tmp_path, "pebble", chain3)
    code, doc = run(capsys, "validate", str(out))
    assert code == 0
    assert len(doc["checks"]) == 6


def test_validate_catches_corrupted_trace(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(RELAXING_SYS)
    _, _, out = _emit_verdict(capsys, tmp_path, "solve", str(f))
    doc = json.loads(out.read_text())
    doc["trace"]["states"][2] = doc["trace"]["states"][0]
    out.write_text(json.dumps(doc))
    code, res = run(capsys, "validate", str(out))
    assert code == 1
    assert res["checks"]["trace-steps"] is False


def test_validate_catches_weakened_invariant(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(CONSTRAINING_SYS)
    _, _, out = _emit_verdict(capsys, tmp_path, "solve", str(f))
    doc = json.loads(out.read_text())
    assert doc["invariant"]["clauses"], "need clauses to corrupt"
    doc["invariant"]["clauses"] = doc["invariant"]["clauses"][:-1]
    out.write_text(json.dumps(doc))
    code, res = run(capsys, "validate", str(out))
    assert code == 1
    assert not all(res["checks"].values())


def test_validate_catches_forged_final_state(capsys, tmp_path):
    f = tmp_path / "fam.sys"
    f.write_text(RELAXING_SYS)
    _, _, out = _emit_verdict(capsys, tmp_path, "solve", str(f))
    doc = json.loads(out.read_text())
    doc["trace"]["states"][-1] = "10"  # not a property violation
    out.write_text(json.dumps(doc))
    code, res = run(capsys, "validate", str(out))
    assert code == 1
    assert res["checks"]["trace-final"] is False


def test_validate_malformed_json(capsys, tmp_path):
    p = tmp_path / "junk.json"
    p.write_text("{not json")
    code, doc = run(capsys, "validate", str(p))
    assert code == 2
    assert doc is None


def test_validate_missing_payload(capsys, tmp_path):
    p = tmp_path / "empty.json"
    p.write_text(json.dumps({"problem": {"kind": "system", "source": "x"}}))
    code, _ = run(capsys, "validate", str(p))
    assert code == 2


# --- bench and plot ----------------------------------------------------------------


@pytest.fixture
def suite(tmp_path):
    d = tmp_path / "suite"
    d.mkdir()
    (d / "chain2.dag").write_text(CHAIN2_DAG)
    (d / "fam.sys").write_text(RELAXING_SYS)
    return d


def test_bench_matrix_and_aggregate(capsys, tmp_path, suite):
    stats = tmp_path / "stats.csv"
    code, doc = run(
        capsys, "bench", str(suite), "--strategies", "naive,relax",
        "--seeds", "0,1,2", "--stats", str(stats),
    )
    assert code == 0
    assert doc["failures"] == 0
    lines = stats.read_text().splitlines()
    # chain2 sweeps p1,p2 and fam sweeps 0,1,2: (2+3) instances x 2 x 3
    assert len(lines) == 1 + 30
    agg = (tmp_path / "stats_aggregate.csv").read_text().splitlines()
    assert agg[0].startswith("problem,strategy,instance,runs")
    assert len(agg) == 1 + 10  # 5 instances x 2 strategies
    assert all(",3," in row for row in agg[1:])  # three runs per group


def test_bench_determinism_across_runs(capsys, tmp_path, suite):
    csvs = []
    for name in ("a.csv", "b.csv"):
        stats = tmp_path / name
        run(capsys, "bench", str(suite), "--strategies", "relax",
            "--seeds", "7", "--stats", str(stats))
        csvs.append([
            line.split(",")[:7] for line in stats.read_text().splitlines()
        ])
    assert csvs[0] == csvs[1]  # counter columns identical, timings excluded


def test_bench_empty_suite(capsys, tmp_path):
    d = tmp_path / "nothing"
    d.mkdir()
    code, _ = run(capsys, "bench", str(d))
    assert code == 2


def test_plot_writes_chart_per_problem(capsys, tmp_path, suite):
    stats = tmp_path / "stats.csv"
    run(capsys, "bench", str(suite), "--strategies", "naive,relax",
        "--seeds", "0,1", "--stats", str(stats))
    out = tmp_path / "plots"
    code, doc = run(capsys, "plot", str(stats), "--metric", "sat_calls",
                    "--out", str(out))
    assert code == 0
    assert len(doc["written"]) == 4  # csv + svg for each of two problems
    pivot = (out / "chain2_sat_calls.csv").read_text().splitlines()
    assert pivot[0] == "instance,naive,relax"
    assert pivot[1].startswith("p1,")
    svg = (out / "chain2_sat_calls.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_plot_missing_file(capsys, tmp_path):
    code, _ = run(capsys, "plot", str(tmp_path / "none.csv"))
    assert code == 2
