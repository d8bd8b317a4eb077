"""Finite scopes, propositional variable allocation, and histories."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .fol import (
    BASE_SIGNATURE,
    OBJ,
    READS,
    SO,
    TXN,
    VAL,
    WRITES,
    FiniteStructure,
    RelationSymbol,
    Sort,
)

Instance = Mapping[int, bool]


@dataclass(frozen=True, order=True)
class Scope:
    txn: int
    obj: int
    val: int

    def __post_init__(self):
        for name in ("txn", "obj", "val"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"scope component {name} must be a positive integer, got {v!r}")

    @property
    def sizes(self) -> dict[Sort, int]:
        return {TXN: self.txn, OBJ: self.obj, VAL: self.val}

    def __str__(self) -> str:
        return f"({self.txn},{self.obj},{self.val})"


@dataclass(frozen=True)
class VarTable:
    """One boolean variable per potential tuple of every covered symbol."""

    scope: Scope
    symbols: tuple[RelationSymbol, ...]
    varmap: Mapping[tuple[str, tuple], int]
    _by_var: tuple = field(repr=False, compare=False)
    _ranges: Mapping[str, range] = field(repr=False, compare=False)

    def var(self, symbol: RelationSymbol | str, *tup: int) -> int:
        name = symbol if isinstance(symbol, str) else symbol.name
        return self.varmap[(name, tup)]

    def symbol(self, name: str) -> RelationSymbol:
        for s in self.symbols:
            if s.name == name:
                return s
        raise KeyError(f"unknown symbol {name}")

    def vars_of(self, symbol: RelationSymbol | str) -> range:
        name = symbol if isinstance(symbol, str) else symbol.name
        try:
            return self._ranges[name]
        except KeyError:
            raise KeyError(f"unknown symbol {name}") from None

    def lookup(self, var: int) -> tuple[str, tuple]:
        """Inverse of :meth:`var`."""
        return self._by_var[var - 1]

    @property
    def num_vars(self) -> int:
        return len(self._by_var)

    def domain(self, sort: Sort) -> range:
        return range(self.scope.sizes[sort])


def encode(scope: Scope, signature: Sequence[RelationSymbol]) -> VarTable:
    """Allocate dense variable ids from 1, symbols in declaration order."""
    names = [s.name for s in signature]
    if len(set(names)) != len(names):
        raise ValueError("relation names must be unique within a signature")
    for base in BASE_SIGNATURE:
        if base not in signature:
            raise ValueError(f"signature lacks base symbol {base.name}")
    sizes = scope.sizes
    varmap: dict[tuple[str, tuple], int] = {}
    by_var: list[tuple[str, tuple]] = []
    ranges: dict[str, range] = {}
    for sym in signature:
        start = len(by_var) + 1
        for tup in itertools.product(*(range(sizes[s]) for s in sym.sorts)):
            by_var.append((sym.name, tup))
            varmap[(sym.name, tup)] = len(by_var)
        ranges[sym.name] = range(start, len(by_var) + 1)
    return VarTable(scope, tuple(signature), varmap, tuple(by_var), ranges)


# --- histories -------------------------------------------------------------------

@dataclass(frozen=True)
class History:
    writes: frozenset = frozenset()
    reads: frozenset = frozenset()
    so: frozenset = frozenset()

    def __post_init__(self):
        for name in ("writes", "reads", "so"):
            object.__setattr__(self, name, frozenset(map(tuple, getattr(self, name))))

    def transactions(self) -> set[int]:
        """Ids of transactions that read or write something."""
        return {t for t, _, _ in self.writes} | {t for t, _, _ in self.reads}

    def is_empty(self, t: int) -> bool:
        return t not in self.transactions()

    def max_indices(self) -> tuple[int, int, int]:
        """Smallest (txn, obj, val) scope this history fits in (at least 1 each)."""
        ts = [t for t, _, _ in self.writes | self.reads] + [t for p in self.so for t in p]
        xs = [x for _, x, _ in self.writes | self.reads]
        vs = [v for _, _, v in self.writes | self.reads]
        return (max(ts, default=0) + 1, max(xs, default=0) + 1, max(vs, default=0) + 1)

    def fits(self, scope: Scope) -> bool:
        t, x, v = self.max_indices()
        return t <= scope.txn and x <= scope.obj and v <= scope.val

    def wf_violations(self) -> list[str]:
        """Reasons this history is not well formed; empty iff well formed."""
        out = []
        for rel in ("writes", "reads"):
            seen: dict[tuple, int] = {}
            for t, x, v in sorted(getattr(self, rel)):
                if (t, x) in seen:
                    out.append(f"t{t} {rel} two values of x{x}")
                seen[(t, x)] = v
        writer: dict[tuple, int] = {}
        for t, x, v in sorted(self.writes):
            if (x, v) in writer:
                out.append(f"x{x}=n{v} written by both t{writer[(x, v)]} and t{t}")
            writer[(x, v)] = t
        written = {(t, x) for t, x, _ in self.writes}
        for t, x, v in sorted(self.reads):
            if (t, x) in written:
                out.append(f"t{t} both reads and writes x{x}")
            if not any(w != t for w, x2, v2 in self.writes if (x2, v2) == (x, v)):
                out.append(f"read of x{x}=n{v} by t{t} has no writer")
        so = self.so
        for a, b in sorted(so):
            if a == b:
                out.append(f"so is reflexive at t{a}")
        for (a, b), (c, d) in itertools.product(sorted(so), repeat=2):
            if b == c and (a, d) not in so:
                out.append(f"so is not transitive: t{a}<t{b}<t{d}")
            if b == d and a != c and (a, c) not in so and (c, a) not in so:
                out.append(f"so predecessors t{a}, t{c} of t{b} are unordered")
            if a == c and b != d and (b, d) not in so and (d, b) not in so:
                out.append(f"so successors t{b}, t{d} of t{a} are unordered")
        return out

    def is_wf(self) -> bool:
        return not self.wf_violations()

    def to_structure(self, scope: Scope, aux: Mapping[RelationSymbol, Iterable[tuple]] | None = None) -> FiniteStructure:
        rels = {WRITES: self.writes, READS: self.reads, SO: self.so}
        for sym, tuples in (aux or {}).items():
            rels[sym] = frozenset(tuples)
        return FiniteStructure(scope.sizes, rels)

    def to_instance(self, table: VarTable) -> dict[int, bool]:
        """Assignment to the table's base variables that encodes this history."""
        inst = {}
        for sym, present in ((WRITES, self.writes), (READS, self.reads), (SO, self.so)):
            for v in table.vars_of(sym):
                inst[v] = table.lookup(v)[1] in present
        return inst

    def renamed(self, mapping: Mapping[int, int]) -> "History":
        return History(
            {(mapping[t], x, v) for t, x, v in self.writes},
            {(mapping[t], x, v) for t, x, v in self.reads},
            {(mapping[a], mapping[b]) for a, b in self.so if a in mapping and b in mapping},
        )

    def strip_empty(self) -> tuple["History", dict[int, int]]:
        """Drop transactions with no operations, renumbering the rest densely.

        Session-order edges touching a dropped transaction are dropped too.
        Returns the new history and the old-id -> new-id mapping.
        """
        keep = sorted(self.transactions())
        mapping = {old: new for new, old in enumerate(keep)}
        return self.renamed(mapping), mapping

    def describe(self) -> str:
        lines = []
        for t in sorted(self.transactions()):
            ops = [f"w(x{x})=n{v}" for tt, x, v in sorted(self.writes) if tt == t]
            ops += [f"r(x{x})=n{v}" for tt, x, v in sorted(self.reads) if tt == t]
            lines.append(f"t{t}: " + " ".join(ops))
        if self.so:
            lines.append("so: " + ", ".join(f"t{a}<t{b}" for a, b in sorted(self.so)))
        return "\n".join(lines)


def decode_relation(table: VarTable, instance: Instance, symbol: RelationSymbol | str) -> frozenset:
    out = set()
    for var in table.vars_of(symbol):
        try:
            value = instance[var]
        except KeyError:
            raise ValueError(f"instance does not assign variable {var} {table.lookup(var)}") from None
        if value:
            out.add(table.lookup(var)[1])
    return frozenset(out)


def decode_history(table: VarTable, instance: Instance) -> History:
    return History(
        decode_relation(table, instance, WRITES),
        decode_relation(table, instance, READS),
        decode_relation(table, instance, SO),
    )


# --- history file format -----------------------------------------------------------

class HistoryFormatError(ValueError):
    pass


def sessions(history: History, txns: Iterable[int] | None = None) -> dict[int, tuple[int, int]]:
    """Map each transaction to (session, seq). Requires so to be chain-shaped."""
    txns = sorted(set(txns if txns is not None else history.transactions()) | {t for p in history.so for t in p})
    preds = {t: {a for a, b in history.so if b == t} for t in txns}
    out: dict[int, tuple[int, int]] = {}
    next_session = 0
    for t in txns:
        if t in out:
            continue
        if preds[t]:
            continue
        chain = sorted((b for a, b in history.so if a == t), key=lambda b: len(preds[b]))
        for seq, member in enumerate([t] + chain):
            out[member] = (next_session, seq)
        next_session += 1
    missing = set(txns) - set(out)
    if missing:
        raise HistoryFormatError(f"session order is not a union of chains (at t{min(missing)})")
    return out


def history_to_json(history: History, txns: Iterable[int] | None = None) -> dict:
    """Serialize; transactions default to those with operations."""
    txns = sorted(set(txns if txns is not None else history.transactions()))
    sess = sessions(history, txns)
    doc = []
    for t in txns:
        session, seq = sess[t]
        doc.append({
            "id": f"t{t}",
            "session": session,
            "seq": seq,
            "writes": {f"x{x}": f"n{v}" for tt, x, v in sorted(history.writes) if tt == t},
            "reads": {f"x{x}": f"n{v}" for tt, x, v in sorted(history.reads) if tt == t},
        })
    return {"transactions": doc}


def _index(name, prefix: str, bound: int | None, what: str) -> int:
    if not isinstance(name, str) or not name.startswith(prefix) or not name[len(prefix):].isdigit():
        raise HistoryFormatError(f"unknown {what} name {name!r}")
    i = int(name[len(prefix):])
    if bound is not None and i >= bound:
        raise HistoryFormatError(f"unknown {what} name {name!r} (outside scope)")
    return i


def history_from_json(doc, scope: Scope | None = None) -> History:
    """Parse the transactions document; ``so`` is derived from session/seq."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise HistoryFormatError(f"invalid JSON: {e}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("transactions"), list):
        raise HistoryFormatError('expected an object with a "transactions" list')
    tb, ob, vb = (scope.txn, scope.obj, scope.val) if scope else (None, None, None)
    writes, reads, placed = set(), set(), []
    seen = set()
    for entry in doc["transactions"]:
        if not isinstance(entry, dict):
            raise HistoryFormatError("transaction entries must be objects")
        unknown = set(entry) - {"id", "session", "seq", "writes", "reads"}
        if unknown:
            raise HistoryFormatError(f"unknown transaction fields {sorted(unknown)}")
        t = _index(entry.get("id"), "t", tb, "transaction")
        if t in seen:
            raise HistoryFormatError(f"duplicate transaction t{t}")
        seen.add(t)
        session, seq = entry.get("session", f"solo{t}"), entry.get("seq", 0)
        if not isinstance(seq, int) or isinstance(seq, bool):
            raise HistoryFormatError(f"seq of t{t} must be an integer")
        placed.append((session, seq, t))
        for key, target in (("writes", writes), ("reads", reads)):
            ops = entry.get(key, {})
            if not isinstance(ops, dict):
                raise HistoryFormatError(f"{key} of t{t} must be an object")
            for x, v in ops.items():
                target.add((t, _index(x, "x", ob, "object"), _index(v, "n", vb, "value")))
    so = set()
    for (s1, q1, a), (s2, q2, b) in itertools.permutations(placed, 2):
        if s1 == s2 and q1 == q2:
            raise HistoryFormatError(f"t{a} and t{b} share session {s1} and seq {q1}")
        if s1 == s2 and q1 < q2:
            so.add((a, b))
    return History(writes, reads, so)
