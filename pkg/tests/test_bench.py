import json

import pytest

from isosynth import bench
from isosynth.bounds import Scope
from isosynth.levels import catalog_by_name

CAT = catalog_by_name()


def problem(a, b, scope=(3, 2, 2), variants=("full",), timeout=60.0, pid="p"):
    return bench.BenchProblem(pid, CAT[a], CAT[b], Scope(*scope), tuple(variants), timeout)


def test_header():
    assert ",".join(bench.HEADER) == \
        "problem_id,problem_type,txns,objs,vals,variant,result,wall_ms,candidates,initial_clauses,solver_calls"


def test_one_row_per_variant(tmp_path):
    rows = bench.run_bench([problem("SER_A", "CC_A", variants=("full", "no_learning"))], tmp_path / "o.csv")
    assert [r.variant for r in rows] == ["full", "no_learning"]
    assert bench.read_rows(tmp_path / "o.csv") == rows


def test_single_unsat_row_has_no_candidates(tmp_path):
    [row] = bench.run_bench([problem("SER_A", "CC_A")], tmp_path / "o.csv")
    assert (row.problem_type, row.result, row.candidates, row.solver_calls) == ("single_unsat", "unsat", 0, 1)


def test_problem_types(tmp_path):
    rows = bench.run_bench([problem("SI_B", "SER_B", pid="a"), problem("SER_A", "SER_B", pid="b"),
                            problem("CC_B", "SER_A", pid="c")], tmp_path / "o.csv")
    assert [r.problem_type for r in rows] == ["single_sat", "multi_unsat", "multi_sat"]


def test_timeout_rows_are_recorded(tmp_path):
    rows = bench.run_bench([problem("SER_A", "SER_B", (4, 2, 3), ("full",), timeout=0.0)], tmp_path / "o.csv")
    assert rows[0].result == "timeout" and rows[0].problem_type == "multi_unsat"


def test_timeout_takes_verdict_of_finished_variant(tmp_path):
    rows = bench.run_bench([problem("CC_B", "SER_A", (3, 2, 2), ("full",)),
                            ], tmp_path / "o.csv")
    p = bench.BenchProblem("p", CAT["CC_B"], CAT["SER_A"], Scope(3, 2, 2), ("full",), 0.0)
    row = bench._row(p, "no_learning", "timeout", 0, type("S", (), {"candidates": 0, "initial_clauses": 0,
                                                                   "solver_calls": 0})(), "sat")
    assert rows[0].problem_type == "multi_sat" and row.problem_type == "multi_sat"


def test_rows_written_incrementally(tmp_path):
    path = tmp_path / "o.csv"
    seen = []
    bench.run_bench([problem("SER_A", "CC_A", variants=("full", "no_fixed_co"))], path,
                    progress=lambda r: seen.append(len(path.read_text().splitlines())))
    assert seen == [2, 3]


def test_parallel_workers_match_serial(tmp_path):
    probs = [problem("SER_A", "CC_A", pid="a"), problem("SI_B", "SER_B", pid="b")]
    serial = bench.run_bench(probs, tmp_path / "s.csv")
    parallel = bench.run_bench(probs, tmp_path / "p.csv", workers=2)
    key = lambda r: (r.problem_id, r.result, r.candidates, r.initial_clauses, r.solver_calls)
    assert list(map(key, serial)) == list(map(key, parallel))


def test_load_suite(tmp_path):
    doc = {"problems": [{"id": "x", "allowed": "SI_B", "disallowed": "SER_B",
                         "scope": {"txns": 3, "objs": 2, "vals": 2}, "variants": ["full"], "timeout": 5}]}
    path = tmp_path / "s.json"
    path.write_text(json.dumps(doc))
    [p] = bench.load_suite(path, CAT)
    assert (p.id, p.scope, p.variants, p.timeout) == ("x", Scope(3, 2, 2), ("full",), 5.0)


@pytest.mark.parametrize("doc,message", [
    ({"problems": 3}, "list of problems"),
    ([{"id": "a", "allowed": "SER_A", "disallowed": "NOPE", "scope": [2, 1, 1]}], "unknown level NOPE"),
    ([{"id": "a", "allowed": "SER_A", "disallowed": "SER_B", "scope": [2, 1]}], "bad scope"),
    ([{"id": "a", "allowed": "SER_A", "disallowed": "SER_B", "scope": [2, 1, 1], "variants": ["fast"]}],
     "unknown variants"),
    ([{"id": "a", "allowed": "SER_A", "disallowed": "SER_B", "scope": [2, 1, 1]}] * 2, "duplicate problem id"),
    ([{"id": "a"}], "lacks"),
])
def test_load_suite_errors(doc, message):
    with pytest.raises(bench.SuiteError, match=message):
        bench.load_suite(doc, CAT)


def test_default_suite_shape():
    suite = bench.default_suite()
    assert len(suite) == 56 * 6
    assert {p.scope.txn for p in suite} == set(range(2, 8))
    assert {(p.scope.obj, p.scope.val) for p in suite} == {(2, 3)}
    assert all(p.variants == ("full", "no_learning", "no_smart_search", "no_fixed_co") for p in suite)
    assert all(p.timeout == 60.0 for p in suite)


def test_read_rows_is_strict(tmp_path):
    path = tmp_path / "o.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        bench.read_rows(path)


def test_scaling_report():
    mk = lambda t, c, ms: bench.BenchRow(f"A-B-t{t}", "single_unsat", t, 2, 3, "full", "unsat", ms, 0, c, 1)
    [entry] = bench.scaling_report([mk(3, 20, 5), mk(2, 10, 7)])
    assert entry["txns"] == [2, 3] and entry["clauses_monotone"] and not entry["time_monotone"]
