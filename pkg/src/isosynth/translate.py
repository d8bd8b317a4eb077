"""Grounding closed first-order formulas into propositional formulas."""
from __future__ import annotations

import math
from typing import Iterable, Mapping

from . import fol
from . import prop as p
from .bounds import Instance, VarTable
from .fol import OBJ, TXN, VAL


class TranslationError(ValueError):
    pass


class _Grounder:
    def __init__(self, table: VarTable):
        self.table = table
        self.txns = range(table.scope.txn)
        self.sizes = table.scope.sizes
        self.atoms: dict[tuple, p.PropFormula] = {}
        self.rel_cache: dict[tuple, dict] = {}
        self.known = {s.name for s in table.symbols}

    def atom(self, name: str, tup: tuple) -> p.PropFormula:
        key = (name, tup)
        node = self.atoms.get(key)
        if node is None:
            try:
                node = self.atoms[key] = p.Var(self.table.varmap[key])
            except KeyError:
                raise TranslationError(f"no variable for {name}{tup}") from None
        return node

    def relation(self, expr) -> dict:
        """Ground a relation expression to a map (a, b) -> PropFormula over all Txn pairs."""
        cached = self.rel_cache.get(expr)
        if cached is not None:
            return cached
        pairs = [(a, b) for a in self.txns for b in self.txns]
        if isinstance(expr, fol.Rel):
            name = expr.symbol.name
            if name not in self.known:
                raise TranslationError(f"unknown relation {name}")
            out = {(a, b): self.atom(name, (a, b)) for a, b in pairs}
        elif isinstance(expr, fol.ReadsFrom):
            objs, vals = range(self.sizes[OBJ]), range(self.sizes[VAL])
            out = {
                (a, b): p.mk_or(
                    p.mk_and((self.atom("writes", (a, x, v)), self.atom("reads", (b, x, v))))
                    for x in objs for v in vals
                )
                for a, b in pairs
            }
        elif isinstance(expr, fol.Union_):
            left, right = self.relation(expr.left), self.relation(expr.right)
            out = {k: p.mk_or((left[k], right[k])) for k in pairs}
        elif isinstance(expr, fol.Join):
            out = _compose(self.relation(expr.left), self.relation(expr.right), self.txns)
        elif isinstance(expr, fol.Closure):
            out = self.relation(expr.inner)
            n = len(self.txns)
            for _ in range(math.ceil(math.log2(n)) if n > 1 else 0):
                step = _compose(out, out, self.txns)
                out = {k: p.mk_or((out[k], step[k])) for k in pairs}
        else:
            raise TranslationError(f"not a relation expression: {expr!r}")
        self.rel_cache[expr] = out
        return out

    def ground(self, f, env: dict) -> p.PropFormula:
        def val(t):
            if isinstance(t, fol.Const):
                if t.index >= self.sizes[t.sort]:
                    raise TranslationError(f"constant {t} outside scope")
                return t.index
            try:
                return env[t.name]
            except KeyError:
                raise TranslationError(f"free variable {t.name}") from None

        if isinstance(f, fol.Atom):
            if f.symbol.name not in self.known:
                raise TranslationError(f"unknown relation {f.symbol.name}")
            return self.atom(f.symbol.name, tuple(val(a) for a in f.args))
        if isinstance(f, fol.RelAtom):
            return self.relation(f.expr)[(val(f.left), val(f.right))]
        if isinstance(f, fol.Eq):
            return p.TRUE if val(f.left) == val(f.right) else p.FALSE
        if isinstance(f, fol.Not):
            return p.mk_not(self.ground(f.body, env))
        if isinstance(f, fol.And):
            return p.mk_and(self._lazy(f.args, env, stop=p.FALSE))
        if isinstance(f, fol.Or):
            return p.mk_or(self._lazy(f.args, env, stop=p.TRUE))
        if isinstance(f, fol.Implies):
            left = self.ground(f.left, env)
            if left == p.FALSE:
                return p.TRUE
            return p.mk_implies(left, self.ground(f.right, env))
        if isinstance(f, (fol.Forall, fol.Exists)):
            name = f.var.name
            stop = p.FALSE if isinstance(f, fol.Forall) else p.TRUE

            def parts():
                for d in range(self.sizes[f.var.sort]):
                    part = self.ground(f.body, {**env, name: d})
                    yield part
                    if part == stop:
                        return
            return p.mk_and(parts()) if isinstance(f, fol.Forall) else p.mk_or(parts())
        raise TranslationError(f"not a formula: {f!r}")

    def _lazy(self, args, env, stop):
        for a in args:
            g = self.ground(a, env)
            yield g
            if g == stop:
                return


def _compose(left: dict, right: dict, txns) -> dict:
    return {
        (a, c): p.mk_or(p.mk_and((left[(a, b)], right[(b, c)])) for b in txns)
        for a in txns for c in txns
    }


def translate(table: VarTable, formula: fol.Formula) -> p.PropFormula:
    """Ground ``formula`` over the finite domains of ``table``.

    Quantifiers expand to finite conjunctions/disjunctions, atoms map to the
    table's variables, constant equalities fold, and closures are grounded by
    iterative squaring. Identical ground relation atoms share one node.
    """
    return _Grounder(table).ground(formula, {})


def translate_many(table: VarTable, formulas: Iterable[fol.Formula]) -> list[p.PropFormula]:
    """Ground several formulas with one shared cache (shared closure nodes)."""
    g = _Grounder(table)
    return [g.ground(f, {}) for f in formulas]


def restrict(f: p.PropFormula, table: VarTable, symbols: Iterable, instance: Instance) -> p.PropFormula:
    """Fix every variable of ``symbols`` to its value in ``instance`` and simplify."""
    values = {}
    for sym in symbols:
        for var in table.vars_of(sym):
            try:
                values[var] = bool(instance[var])
            except KeyError:
                raise ValueError(f"instance does not assign {table.lookup(var)}") from None
    return p.substitute(f, values)
