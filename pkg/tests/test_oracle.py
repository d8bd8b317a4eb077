import itertools
import random

import pytest

from isosynth.anomalies import ANOMALIES, CAUSALITY_VIOLATION, WRITE_SKEW
from isosynth.bounds import History, Scope
from isosynth.fol import evaluate
from isosynth.levels import builtin_catalog, catalog_by_name, membership_formula
from isosynth.oracle import (
    aux_assignments, allowed_oracle, allowed_witness, enum_histories, synth_oracle,
)
from isosynth.synth import check_membership

from helpers import histories, oracle_table

CAT = catalog_by_name()
LEVELS = builtin_catalog()

# Frozen from an exhaustive run of the enumerator.
COUNTS = {(1, 1, 1): 2, (2, 1, 2): 21, (2, 2, 2): 321, (3, 2, 2): 19977}


@pytest.mark.parametrize("scope", sorted(COUNTS))
def test_history_counts(scope):
    assert len(histories(Scope(*scope))) == COUNTS[scope]


def test_scope_one_has_no_reads():
    assert all(not h.reads for h in enum_histories(Scope(1, 1, 1)))


def test_enumeration_is_wf_and_duplicate_free():
    hs = histories(Scope(2, 2, 2))
    assert all(h.is_wf() and h.fits(Scope(2, 2, 2)) for h in hs)
    assert len(set(hs)) == len(hs)


def test_enumeration_is_deterministic():
    assert list(enum_histories(Scope(2, 1, 2))) == list(enum_histories(Scope(2, 1, 2)))


def test_empty_transactions_only_as_suffix():
    for h in histories(Scope(3, 2, 2)):
        active = h.transactions()
        assert active == set(range(len(active)))


def test_aux_assignment_counts():
    # 3! commit orders; visibility: 3! arbitrations times 2^3 subsets of each
    assert sum(1 for _ in aux_assignments(CAT["SER_A"], 3)) == 6
    assert sum(1 for _ in aux_assignments(CAT["SER_B"], 3)) == 48


def test_oracle_examples():
    assert allowed_oracle(CAT["SER_A"], WRITE_SKEW.history) is False
    assert allowed_oracle(CAT["RA_A"], CAUSALITY_VIOLATION.history) is True
    assert all(allowed_oracle(l, History(), Scope(2, 1, 1)) for l in LEVELS)


def test_witness_satisfies_membership():
    w = allowed_witness(CAT["SI_B"], WRITE_SKEW.history, WRITE_SKEW.scope)
    assert evaluate(membership_formula(CAT["SI_B"]), WRITE_SKEW.history.to_structure(WRITE_SKEW.scope, w))


def test_synth_oracle_examples():
    found = synth_oracle(CAT["SI_B"], CAT["SER_B"], Scope(3, 2, 2))
    assert found.sat and allowed_oracle(CAT["SI_B"], found.history)
    assert not allowed_oracle(CAT["SER_B"], found.history)
    assert synth_oracle(CAT["SER_A"], CAT["CC_A"], Scope(2, 2, 2)).sat is False
    assert synth_oracle(CAT["PC_B"], CAT["PC_B"], Scope(2, 1, 2)).sat is False


def test_synth_oracle_rejects_large_scope():
    with pytest.raises(ValueError):
        synth_oracle(CAT["SER_A"], CAT["CC_A"], Scope(4, 2, 2))


@pytest.mark.parametrize("name", sorted(ANOMALIES))
def test_anomaly_matrix(name):
    a = ANOMALIES[name]
    got = {l.name for l in LEVELS if allowed_oracle(l, a.history, a.scope)}
    assert got == a.accepted_by


# Frozen counts of allowed histories at (3,2,2) out of 19977.
ALLOWED_322 = {"SER_A": 9233, "PC_A": 9305, "CC_A": 9305, "RA_A": 9305,
               "SER_B": 9233, "SI_B": 9305, "PC_B": 9305, "CC_B": 9305}


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(ALLOWED_322))
def test_allowed_counts_and_membership_agreement(name):
    scope = Scope(3, 2, 2)
    table = oracle_table(CAT[name], scope)
    assert sum(table) == ALLOWED_322[name]
    rng = random.Random(name)
    sample = rng.sample(range(len(table)), 400)
    for i in sample:
        h = histories(scope)[i]
        assert check_membership(CAT[name], h, scope).allowed == table[i]


@pytest.mark.parametrize("level", LEVELS, ids=lambda l: l.name)
def test_membership_agreement_full_sweep_222(level):
    scope = Scope(2, 2, 2)
    for h, expected in zip(histories(scope), oracle_table(level, scope)):
        assert check_membership(level, h, scope).allowed == expected


def test_chains_and_equivalences_at_322():
    scope = Scope(3, 2, 2)
    t = {l.name: oracle_table(l, scope) for l in LEVELS}
    implies = lambda a, b: all(y or not x for x, y in zip(t[a], t[b]))
    for a, b in itertools.pairwise(["SER_A", "PC_A", "CC_A", "RA_A"]):
        assert implies(a, b)
    for a, b in [("SER_B", "SI_B"), ("SI_B", "PC_B"), ("PC_B", "CC_B")]:
        assert implies(a, b)
    for a, b in [("SER_A", "SER_B"), ("CC_A", "CC_B"), ("PC_A", "PC_B")]:
        assert t[a] == t[b]
