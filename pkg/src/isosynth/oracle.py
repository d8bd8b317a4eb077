"""Brute-force reference: enumerate histories and auxiliary relations, evaluate directly.

Shares no code with grounding or SAT solving; agreement with the engine is a
genuine cross-check. Only feasible at tiny scopes.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterator

from .bounds import History, Scope
from .fol import And, FiniteStructure, compile_formula
from .levels import LevelSpec, well_formedness

MAX_SCOPE = Scope(3, 2, 2)


def _chain_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    """Every way to split ``items`` into disjoint ordered chains."""
    if not items:
        yield []
        return
    *rest, last = items
    for chains in _chain_partitions(rest):
        yield chains + [[last]]
        for i, chain in enumerate(chains):
            for pos in range(len(chain) + 1):
                yield chains[:i] + [chain[:pos] + [last] + chain[pos:]] + chains[i + 1:]


def _so_of(chains) -> frozenset:
    return frozenset((c[i], c[j]) for c in chains for i in range(len(c)) for j in range(i + 1, len(c)))


def enum_histories(scope: Scope) -> Iterator[History]:
    """All well-formed histories within ``scope``.

    Transactions without operations only appear as a suffix of the id range
    and take no part in session order, so each history appears once up to
    padding with empty transactions.
    """
    objs, vals = range(scope.obj), range(scope.val)
    for k in range(scope.txn + 1):
        txns = range(k)
        slots = [(t, x) for t in txns for x in objs]
        for wchoice in itertools.product([None, *vals], repeat=len(slots)):
            writes = [(t, x, val) for (t, x), val in zip(slots, wchoice) if val is not None]
            if len({(x, val) for _, x, val in writes}) != len(writes):
                continue
            writer = {(x, val): t for t, x, val in writes}
            written = {(t, x) for t, x, _ in writes}
            rslots = [(t, x) for t, x in slots if (t, x) not in written]
            options = [
                [None] + [val for val in vals if writer.get((x, val), t) != t]
                for t, x in rslots
            ]
            for rchoice in itertools.product(*options):
                reads = [(t, x, val) for (t, x), val in zip(rslots, rchoice) if val is not None]
                active = {t for t, _, _ in writes} | {t for t, _, _ in reads}
                if len(active) != k:
                    continue
                for chains in _chain_partitions(list(txns)):
                    yield History(writes, reads, _so_of(chains))


@functools.lru_cache(maxsize=None)
def _compiled(formula):
    return compile_formula(formula)


def aux_assignments(level: LevelSpec, txn: int) -> Iterator[dict]:
    """Candidate interpretations of the framework's auxiliary relations.

    Total-order symbols range over strict total orders; symbols declared
    contained in another range over subsets of it; the rest over all subsets.
    """
    fw = level.framework
    orders = [s for s in fw.aux if s.name in fw.total_orders]
    inside = dict(fw.contained_in)
    free = [s for s in fw.aux if s.name not in fw.total_orders]
    for s in fw.aux:
        if not s.is_binary_txn:
            raise ValueError(f"oracle cannot enumerate non-binary auxiliary relation {s.name}")
    all_pairs = [(a, b) for a in range(txn) for b in range(txn)]
    by_name = {s.name: s for s in fw.aux}

    def order_choices():
        for perms in itertools.product(itertools.permutations(range(txn)), repeat=len(orders)):
            yield {
                s: frozenset((perm[i], perm[j]) for i in range(txn) for j in range(i + 1, txn))
                for s, perm in zip(orders, perms)
            }

    for fixed in order_choices():
        def subsets(idx, acc):
            if idx == len(free):
                yield dict(acc)
                return
            s = free[idx]
            container = inside.get(s.name)
            pool = sorted(acc[by_name[container]]) if container in by_name and by_name[container] in acc else all_pairs
            for r in range(len(pool) + 1):
                for combo in itertools.combinations(pool, r):
                    acc[s] = frozenset(combo)
                    yield from subsets(idx + 1, acc)
            acc.pop(s, None)
        yield from subsets(0, dict(fixed))


def allowed_witness(level: LevelSpec, history: History, scope: Scope | None = None) -> dict | None:
    """An auxiliary assignment under which the history satisfies the level, or None."""
    if scope is None:
        scope = Scope(*history.max_indices())
    if not _compiled(well_formedness())(history.to_structure(scope)):
        return None
    check = _compiled(_struct_and_level(level))
    sizes = scope.sizes
    base = {}
    for sym in level.framework.signature[:3]:
        base[sym] = getattr(history, sym.name)
    for aux in aux_assignments(level, scope.txn):
        if check(FiniteStructure(sizes, {**base, **aux})):
            return aux
    return None


@functools.lru_cache(maxsize=None)
def _struct_and_level(level: LevelSpec):
    return And((level.framework.axioms, level.formula))


def allowed_oracle(level: LevelSpec, history: History, scope: Scope | None = None) -> bool:
    return allowed_witness(level, history, scope) is not None


@dataclass(frozen=True)
class OracleVerdict:
    sat: bool
    history: History | None = None


def synth_oracle(allowed: LevelSpec, disallowed: LevelSpec, scope: Scope) -> OracleVerdict:
    """First enumerated history allowed by ``allowed`` and not by ``disallowed``."""
    if scope.txn > MAX_SCOPE.txn or scope.obj > MAX_SCOPE.obj or scope.val > MAX_SCOPE.val:
        raise ValueError(f"oracle scope {scope} exceeds {MAX_SCOPE}")
    for h in enum_histories(scope):
        if allowed_oracle(allowed, h, scope) and not allowed_oracle(disallowed, h, scope):
            return OracleVerdict(True, h)
    return OracleVerdict(False)
