"""Classic anomaly histories and the catalog levels expected to accept each."""
from __future__ import annotations

from dataclasses import dataclass

from .bounds import History, Scope


@dataclass(frozen=True)
class Anomaly:
    name: str
    history: History
    scope: Scope
    accepted_by: frozenset[str]


ALL_LEVELS = frozenset({"SER_A", "PC_A", "CC_A", "RA_A", "SER_B", "SI_B", "PC_B", "CC_B"})

# Triples are (txn, obj, val); so pairs are (before, after).
WRITE_SKEW = Anomaly(
    "WS",
    History({(0, 0, 0), (0, 1, 0), (1, 1, 1), (2, 0, 1)}, {(1, 0, 0), (2, 1, 0)}, ()),
    Scope(3, 2, 2),
    ALL_LEVELS - {"SER_A", "SER_B"},
)
LONG_FORK = Anomaly(
    "LF",
    History({(0, 0, 0), (0, 1, 0), (1, 0, 1), (2, 1, 1)}, {(3, 0, 1), (3, 1, 0), (4, 1, 1), (4, 0, 0)}, ()),
    Scope(5, 2, 2),
    frozenset({"CC_A", "CC_B", "RA_A"}),
)
CAUSALITY_VIOLATION = Anomaly(
    "CV",
    History({(0, 0, 0), (0, 1, 0), (1, 0, 1), (2, 1, 1)}, {(2, 0, 1), (3, 1, 1), (3, 0, 0)}, {(0, 1)}),
    Scope(4, 2, 2),
    frozenset({"RA_A"}),
)
FRACTURED_READ = Anomaly(
    "FR",
    History({(0, 0, 0), (0, 1, 0), (1, 0, 1), (1, 1, 1)}, {(2, 0, 1), (2, 1, 0)}, ()),
    Scope(3, 2, 2),
    frozenset(),
)

ANOMALIES = {a.name: a for a in (WRITE_SKEW, LONG_FORK, CAUSALITY_VIOLATION, FRACTURED_READ)}
