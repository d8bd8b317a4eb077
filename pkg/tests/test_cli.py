import io
import json
from pathlib import Path

import pytest

from isosynth.anomalies import WRITE_SKEW
from isosynth.bounds import history_to_json
from isosynth.cli import run_cli

DATA = Path(__file__).parent / "data"


def cli(*argv):
    out = io.StringIO()
    code = run_cli(list(argv), out)
    return code, out.getvalue()


SCOPE = ["--txns", "3", "--objs", "2", "--vals", "2"]


def test_synth_json_sat():
    code, out = cli("synth", "--allowed", "SI_B", "--disallowed", "SER_B", *SCOPE, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["result"] == "sat"
    assert len(doc["history"]["transactions"]) == 3
    assert set(doc["witness"]) == {"vis", "ar"}
    assert set(doc["stats"]) == {"candidates", "initial_clauses", "solver_calls", "wall_ms"}


def test_synth_output_round_trips_through_check(tmp_path):
    code, out = cli("synth", "--allowed", "SI_B", "--disallowed", "SER_B", *SCOPE, "--format", "json")
    path = tmp_path / "out.json"
    path.write_text(out)
    assert cli("check", "--level", "SI_B", "--history", str(path))[1].startswith("SI_B: allowed")
    assert cli("check", "--level", "SER_B", "--history", str(path))[1].strip() == "SER_B: disallowed"


def test_synth_text_unsat():
    code, out = cli("synth", "--allowed", "SER_A", "--disallowed", "CC_A", *SCOPE)
    assert code == 0
    assert out.splitlines()[0] == "result: unsat"
    assert "candidates: 0" in out and "solver_calls: 1" in out


def test_fail_on_unsat():
    code, _ = cli("synth", "--allowed", "SER_A", "--disallowed", "CC_A", *SCOPE, "--fail-on-unsat")
    assert code == 1


def test_synth_timeout_exit_code():
    code, out = cli("synth", "--allowed", "SER_A", "--disallowed", "SER_B",
                    "--txns", "4", "--objs", "2", "--vals", "3", "--timeout", "0")
    assert code == 3 and "result: timeout" in out


def test_unknown_level(capsys):
    code, _ = cli("synth", "--allowed", "NOPE", "--disallowed", "SER_A", *SCOPE)
    assert code == 2
    assert "unknown level NOPE" in capsys.readouterr().err


def test_bad_flags():
    assert cli("synth", "--allowed", "SER_A")[0] == 2
    assert cli("synth", "--allowed", "SER_A", "--disallowed", "SER_B", "--txns", "0", "--objs", "1", "--vals", "1")[0] == 2


def test_compare_equivalent():
    code, out = cli("compare", "--a", "SER_A", "--b", "SER_B", *SCOPE)
    assert code == 0
    assert out.splitlines()[-1] == "equivalent within scope"


def test_compare_not_equivalent_json():
    code, out = cli("compare", "--a", "SI_B", "--b", "SER_B", *SCOPE, "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["equivalent"] is False
    assert [d["verdict"] for d in doc["directions"]] == ["counterexample", "holds-within-scope"]


def test_check_fixture(tmp_path):
    path = tmp_path / "ws.json"
    path.write_text(json.dumps(history_to_json(WRITE_SKEW.history)))
    code, out = cli("check", "--level", "SER_A", "--history", str(path), "--format", "json")
    assert code == 0 and json.loads(out) == {"level": "SER_A", "verdict": "disallowed"}
    code, out = cli("check", "--level", "RA_A", "--history", str(path), "--format", "json")
    assert json.loads(out)["verdict"] == "allowed" and "co" in json.loads(out)["witness"]


@pytest.mark.parametrize("content", ["{", '{"transactions": [{"id": "zz"}]}',
                                     '{"transactions": [{"id": "t0", "reads": {"x0": "n0"}}]}'])
def test_check_malformed_history(tmp_path, capsys, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    assert cli("check", "--level", "SER_A", "--history", str(path))[0] == 2
    assert "malformed history" in capsys.readouterr().err


def test_check_missing_file(capsys):
    assert cli("check", "--level", "SER_A", "--history", "/nonexistent/h.json")[0] == 2


def test_levels_list():
    code, out = cli("levels", "list")
    assert code == 0
    assert out.splitlines()[0] == "SER_A\tcommit_order"
    assert len(out.splitlines()) == 8


def test_spec_file_adds_levels(tmp_path):
    path = tmp_path / "mine.lvl"
    path.write_text((DATA / "catalog.lvl").read_text().replace("level SI_B", "level MY_SI"))
    code, out = cli("levels", "list", "--spec", str(path))
    assert "MY_SI\tvisibility" in out
    code, out = cli("synth", "--spec", str(path), "--allowed", "MY_SI", "--disallowed", "SER_B", *SCOPE)
    assert out.startswith("result: sat")


def test_spec_file_parse_error(tmp_path, capsys):
    path = tmp_path / "bad.lvl"
    path.write_text("level Bad { framework commit_order; axiom so(x0, t0) }")
    assert cli("levels", "list", "--spec", str(path))[0] == 2
    assert "1:43: sort mismatch" in capsys.readouterr().err


def test_dimacs_dir(tmp_path):
    code, out = cli("synth", "--allowed", "SER_A", "--disallowed", "CC_A", *SCOPE, "--dimacs-dir", str(tmp_path))
    assert [f.name for f in tmp_path.iterdir()] == ["query_0000.cnf"]


def test_solver_choice():
    code, out = cli("--solver", "cdcl", "synth", "--allowed", "SI_B", "--disallowed", "SER_B", *SCOPE)
    assert code == 0 and out.startswith("result: sat")


def test_bench_subcommand(tmp_path):
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps([{"id": "p1", "allowed": "SER_A", "disallowed": "CC_A",
                                  "scope": [3, 2, 2], "variants": ["full", "no_learning"]}]))
    out_csv = tmp_path / "rows.csv"
    code, out = cli("bench", "--suite", str(suite), "--output", str(out_csv))
    assert code == 0 and "wrote 2 rows" in out
    assert out_csv.read_text().splitlines()[0] == \
        "problem_id,problem_type,txns,objs,vals,variant,result,wall_ms,candidates,initial_clauses,solver_calls"


def test_bench_malformed_suite(tmp_path, capsys):
    suite = tmp_path / "suite.json"
    suite.write_text('{"problems": [{"id": "p"}]}')
    assert cli("bench", "--suite", str(suite), "--output", str(tmp_path / "o.csv"))[0] == 2
