import itertools

import pytest

from isosynth.anomalies import ANOMALIES, CAUSALITY_VIOLATION, WRITE_SKEW
from isosynth.bounds import History, Scope
from isosynth.fol import evaluate
from isosynth.levels import AR, CO, VIS, builtin_catalog, catalog_by_name, membership_formula, well_formedness

CAT = catalog_by_name()


def order(*ts):
    return {(a, b) for i, a in enumerate(ts) for b in ts[i + 1:]}


def holds(level, history, scope, aux):
    return evaluate(membership_formula(level), history.to_structure(scope, aux))


def test_catalog_shape():
    cat = builtin_catalog()
    assert [l.name for l in cat] == ["SER_A", "PC_A", "CC_A", "RA_A", "SER_B", "SI_B", "PC_B", "CC_B"]
    assert {l.framework.name for l in cat} == {"commit_order", "visibility"}
    assert all(l.diagnostics() == [] for l in cat)


def test_ser_a_rejects_ws_under_identity_order():
    assert not holds(CAT["SER_A"], WRITE_SKEW.history, WRITE_SKEW.scope, {CO: order(0, 1, 2)})


def test_ser_a_rejects_ws_under_every_order():
    for perm in itertools.permutations(range(3)):
        assert not holds(CAT["SER_A"], WRITE_SKEW.history, WRITE_SKEW.scope, {CO: order(*perm)})


def test_si_b_accepts_ws_with_stated_witness():
    aux = {VIS: {(0, 1), (0, 2)}, AR: order(0, 1, 2)}
    assert holds(CAT["SI_B"], WRITE_SKEW.history, WRITE_SKEW.scope, aux)


def test_ra_a_accepts_cv_under_identity_order():
    assert holds(CAT["RA_A"], CAUSALITY_VIOLATION.history, CAUSALITY_VIOLATION.scope, {CO: order(0, 1, 2, 3)})


def test_cc_a_rejects_cv_under_every_order():
    cv = CAUSALITY_VIOLATION
    assert not any(holds(CAT["CC_A"], cv.history, cv.scope, {CO: order(*perm)})
                   for perm in itertools.permutations(range(4)))


@pytest.mark.parametrize("history,expected", [
    (History({(0, 0, 0)}, (), ()), True),
    (History((), {(0, 0, 0)}, ()), False),
    (History({(0, 0, 0), (1, 0, 0)}, (), ()), False),
])
def test_well_formedness_formula(history, expected):
    assert evaluate(well_formedness(), history.to_structure(Scope(2, 1, 1))) is expected
    assert history.is_wf() is expected


def test_fixtures_are_well_formed():
    for a in ANOMALIES.values():
        assert a.history.is_wf() and a.history.fits(a.scope)


def test_catalog_by_name_accepts_extra_levels():
    extra = CAT["SER_A"].__class__("MINE", CAT["SER_A"].framework, CAT["SER_A"].formula)
    assert catalog_by_name([extra])["MINE"] is extra
