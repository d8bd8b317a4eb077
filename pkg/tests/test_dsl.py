from pathlib import Path

import pytest

from isosynth.bounds import Scope
from isosynth.dsl import LevelParseError, parse_level_file
from isosynth.levels import builtin_catalog, catalog_by_name
from isosynth.oracle import allowed_oracle, enum_histories

DATA = Path(__file__).parent / "data"


def test_catalog_file_equals_builtins():
    assert parse_level_file((DATA / "catalog.lvl").read_text()) == builtin_catalog()


def test_ser_a_one_liner():
    text = ("level SerA { framework commit_order; axiom forall x:Obj, t1:Txn, t2:Txn, t3:Txn . "
            "wr[x](t1,t2) && writesx(t3,x) && t3 != t1 && co(t3,t2) => co(t3,t1) }")
    [level] = parse_level_file(text)
    assert level.name == "SerA"
    assert level.formula == catalog_by_name()["SER_A"].formula


def test_formula_macro_expands_like_builtin():
    text = """
    level PcA {
      framework commit_order;
      let hb() = (so | wr)+;
      let before(a, b) = exists t4:Txn . (t4 = a || co(a,t4)) && hb(t4,b);
      axiom forall x:Obj, t1:Txn, t2:Txn, t3:Txn .
        wr[x](t1,t2) && writesx(t3,x) && t3 != t1 && before(t3,t2) => co(t3,t1);
    }"""
    [level] = parse_level_file(text)
    builtin = catalog_by_name()["PC_A"]
    for h in list(enum_histories(Scope(3, 1, 2)))[::7]:
        assert allowed_oracle(level, h) == allowed_oracle(builtin, h)


def test_sort_error_location():
    with pytest.raises(LevelParseError) as err:
        parse_level_file("level Bad { framework commit_order; axiom so(x0, t0) }")
    assert [str(d) for d in err.value.diagnostics] == [
        "1:43: sort mismatch at argument 1 of so: x0 is Obj, expected Txn"]


def test_empty_file():
    assert parse_level_file("") == []
    assert parse_level_file("// nothing here\n") == []


@pytest.mark.parametrize("text,message", [
    ("level L { framework nope; axiom true }", "unknown framework nope"),
    ("level L { framework commit_order; axiom forall t:Txn . foo(t,t) }", "unknown relation foo"),
    ("level L { framework commit_order; axiom forall t:Txn . so(t,u) }", "unbound variable u"),
    ("level L { framework commit_order; }", "has no axiom"),
    ("level L { framework commit_order; axiom forall t:Txn . so(t) }", "expects 2 arguments"),
    ("level L { framework commit_order; axiom forall t:Txn . forall t:Txn . so(t,t) }", "shadows"),
    ("level L { framework commit_order; axiom forall t:Txn . co(t,t0) }", "mentions constants"),
    ("level L { framework commit_order; axiom forall t:Txn . !so(t,t) }\n"
     "level L { framework commit_order; axiom forall t:Txn . !so(t,t) }", "duplicate level L"),
])
def test_diagnostics(text, message):
    with pytest.raises(LevelParseError) as err:
        parse_level_file(text)
    assert any(message in str(d) for d in err.value.diagnostics), err.value.diagnostics


def test_macro_binders_do_not_capture():
    text = """
    level L {
      framework commit_order;
      let later(a) = exists b:Txn . co(a,b);
      axiom forall b:Txn . later(b) || !later(b);
    }"""
    [level] = parse_level_file(text)
    assert level.diagnostics() == []
