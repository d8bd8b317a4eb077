"""Sorted first-order constraint language: syntax, well-formedness, semantics.

Formulas are built over three disjoint sorts (transactions, objects, values)
and a signature of relation symbols. Binary transaction relations can be
combined into relation expressions (union, join, transitive closure) that are
applied like atoms.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union


class Sort(enum.Enum):
    TXN = "Txn"
    OBJ = "Obj"
    VAL = "Val"

    @property
    def prefix(self) -> str:
        return _PREFIX[self]

    def __repr__(self) -> str:
        return self.value


_PREFIX = {Sort.TXN: "t", Sort.OBJ: "x", Sort.VAL: "n"}

TXN, OBJ, VAL = Sort.TXN, Sort.OBJ, Sort.VAL


# --- terms -----------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    index: int
    sort: Sort

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 0:
            raise ValueError(f"constant index must be a non-negative int, got {self.index!r}")

    def __str__(self) -> str:
        return f"{self.sort.prefix}{self.index}"


Term = Union[Var, Const]


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    sorts: tuple[Sort, ...]

    @property
    def arity(self) -> int:
        return len(self.sorts)

    @property
    def is_binary_txn(self) -> bool:
        return self.sorts == (TXN, TXN)

    def __str__(self) -> str:
        return self.name


WRITES = RelationSymbol("writes", (TXN, OBJ, VAL))
READS = RelationSymbol("reads", (TXN, OBJ, VAL))
SO = RelationSymbol("so", (TXN, TXN))
BASE_SIGNATURE: tuple[RelationSymbol, ...] = (WRITES, READS, SO)


# --- relation expressions ----------------------------------------------------

@dataclass(frozen=True)
class Rel:
    symbol: RelationSymbol

    def __str__(self) -> str:
        return self.symbol.name


@dataclass(frozen=True)
class ReadsFrom:
    """Derived relation: (a, b) iff b reads some value a wrote."""

    def __str__(self) -> str:
        return "wr"


WR = ReadsFrom()


@dataclass(frozen=True)
class Union_:
    left: "RelExpr"
    right: "RelExpr"

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Join:
    left: "RelExpr"
    right: "RelExpr"

    def __str__(self) -> str:
        return f"({self.left} ; {self.right})"


@dataclass(frozen=True)
class Closure:
    inner: "RelExpr"

    def __str__(self) -> str:
        return f"{self.inner}+"


RelExpr = Union[Rel, ReadsFrom, Union_, Join, Closure]


# --- formulas -----------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    symbol: RelationSymbol
    args: tuple

    def __str__(self) -> str:
        return f"{self.symbol.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class RelAtom:
    expr: RelExpr
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.expr}({self.left}, {self.right})"


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        if isinstance(self.body, Eq):
            return f"{self.body.left} != {self.body.right}"
        return f"!{_paren(self.body)}"


@dataclass(frozen=True)
class And:
    args: tuple

    def __str__(self) -> str:
        if not self.args:
            return "true"
        return " && ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Or:
    args: tuple

    def __str__(self) -> str:
        if not self.args:
            return "false"
        return " || ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_paren(self.left)} => {_paren(self.right)}"


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "Formula"

    def __str__(self) -> str:
        return f"forall {self.var.name}:{self.var.sort.value} . {self.body}"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"

    def __str__(self) -> str:
        return f"exists {self.var.name}:{self.var.sort.value} . {self.body}"


Formula = Union[Atom, RelAtom, Eq, Not, And, Or, Implies, Forall, Exists]

TRUE = And(())
FALSE = Or(())


def _paren(f) -> str:
    if isinstance(f, (Atom, RelAtom, Not)) or (isinstance(f, Eq)):
        return str(f)
    return f"({f})"


def conj(*fs: Formula) -> Formula:
    return fs[0] if len(fs) == 1 else And(tuple(fs))


def disj(*fs: Formula) -> Formula:
    return fs[0] if len(fs) == 1 else Or(tuple(fs))


def forall(variables: Sequence[Var], body: Formula) -> Formula:
    for v in reversed(variables):
        body = Forall(v, body)
    return body


def exists(variables: Sequence[Var], body: Formula) -> Formula:
    for v in reversed(variables):
        body = Exists(v, body)
    return body


def neq(a: Term, b: Term) -> Formula:
    return Not(Eq(a, b))


def const(name: str) -> Const:
    """Parse a constant name such as ``t0``, ``x1`` or ``n2``."""
    for sort in Sort:
        if name.startswith(sort.prefix) and name[1:].isdigit():
            return Const(int(name[1:]), sort)
    raise ValueError(f"not a constant name: {name!r}")


# --- well-formedness -----------------------------------------------------------

@dataclass(frozen=True)
class Diagnostic:
    subterm: str
    reason: str

    def __str__(self) -> str:
        return f"{self.reason} (in {self.subterm})"


def check_well_formed(formula: Formula, signature: Iterable[RelationSymbol]) -> list[Diagnostic]:
    """Return an empty list iff ``formula`` is closed, sort-correct and in-signature."""
    sig = {s.name: s for s in signature}
    out: list[Diagnostic] = []

    def term_ok(t, expected: Sort, where: str, pos: int, bound: dict, name: str):
        if isinstance(t, Var):
            if t.name not in bound:
                out.append(Diagnostic(where, f"unbound variable {t.name}"))
                return
            if bound[t.name] != t.sort:
                out.append(Diagnostic(where, f"variable {t.name} used with sort {t.sort.value} but bound as {bound[t.name].value}"))
                return
        if t.sort != expected:
            out.append(Diagnostic(where, f"sort mismatch at argument {pos} of {name}"))

    def rel(e, where: str):
        if isinstance(e, Rel):
            s = sig.get(e.symbol.name)
            if s is None:
                out.append(Diagnostic(where, f"unknown relation {e.symbol.name}"))
            elif s != e.symbol:
                out.append(Diagnostic(where, f"relation {e.symbol.name} does not match its declared signature"))
            elif not s.is_binary_txn:
                out.append(Diagnostic(where, f"relation {s.name} is not a binary Txn relation"))
        elif isinstance(e, ReadsFrom):
            for s in (WRITES, READS):
                if sig.get(s.name) != s:
                    out.append(Diagnostic(where, f"wr requires {s.name} in the signature"))
        elif isinstance(e, (Union_, Join)):
            rel(e.left, where)
            rel(e.right, where)
        elif isinstance(e, Closure):
            rel(e.inner, where)
        else:
            out.append(Diagnostic(where, f"not a relation expression: {e!r}"))

    def go(f, bound: dict):
        if isinstance(f, Atom):
            where = str(f)
            s = sig.get(f.symbol.name)
            if s is None:
                out.append(Diagnostic(where, f"unknown relation {f.symbol.name}"))
                return
            if len(f.args) != s.arity:
                out.append(Diagnostic(where, f"arity mismatch for {s.name}: expected {s.arity}, got {len(f.args)}"))
                return
            for i, (t, srt) in enumerate(zip(f.args, s.sorts), start=1):
                term_ok(t, srt, where, i, bound, s.name)
        elif isinstance(f, RelAtom):
            where = str(f)
            rel(f.expr, where)
            term_ok(f.left, TXN, where, 1, bound, str(f.expr))
            term_ok(f.right, TXN, where, 2, bound, str(f.expr))
        elif isinstance(f, Eq):
            where = str(f)
            for t in (f.left, f.right):
                if isinstance(t, Var) and t.name not in bound:
                    out.append(Diagnostic(where, f"unbound variable {t.name}"))
            if f.left.sort != f.right.sort:
                out.append(Diagnostic(where, "equality between terms of different sorts"))
        elif isinstance(f, Not):
            go(f.body, bound)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                go(a, bound)
        elif isinstance(f, Implies):
            go(f.left, bound)
            go(f.right, bound)
        elif isinstance(f, (Forall, Exists)):
            if f.var.name in bound:
                out.append(Diagnostic(str(f)[:60], f"variable {f.var.name} shadows an enclosing binder"))
            go(f.body, {**bound, f.var.name: f.var.sort})
        else:
            out.append(Diagnostic(repr(f)[:60], "not a formula"))

    go(formula, {})
    return out


def free_variables(formula: Formula) -> set[Var]:
    out: set[Var] = set()

    def terms(ts, bound):
        for t in ts:
            if isinstance(t, Var) and t.name not in bound:
                out.add(t)

    def go(f, bound):
        if isinstance(f, Atom):
            terms(f.args, bound)
        elif isinstance(f, (RelAtom, Eq)):
            terms((f.left, f.right), bound)
        elif isinstance(f, Not):
            go(f.body, bound)
        elif isinstance(f, (And, Or)):
            for a in f.args:
                go(a, bound)
        elif isinstance(f, Implies):
            go(f.left, bound)
            go(f.right, bound)
        elif isinstance(f, (Forall, Exists)):
            go(f.body, bound | {f.var.name})

    go(formula, frozenset())
    return out


def constants(formula: Formula) -> set[Const]:
    out: set[Const] = set()
    for node in walk(formula):
        if isinstance(node, Atom):
            out.update(a for a in node.args if isinstance(a, Const))
        elif isinstance(node, (RelAtom, Eq)):
            out.update(a for a in (node.left, node.right) if isinstance(a, Const))
    return out


def walk(formula: Formula):
    """Yield every subformula, preorder."""
    stack = [formula]
    while stack:
        f = stack.pop()
        yield f
        if isinstance(f, Not):
            stack.append(f.body)
        elif isinstance(f, (And, Or)):
            stack.extend(reversed(f.args))
        elif isinstance(f, Implies):
            stack.extend((f.right, f.left))
        elif isinstance(f, (Forall, Exists)):
            stack.append(f.body)


def symbols_used(formula: Formula) -> set[str]:
    names: set[str] = set()

    def rel(e):
        if isinstance(e, Rel):
            names.add(e.symbol.name)
        elif isinstance(e, ReadsFrom):
            names.update(("writes", "reads"))
        elif isinstance(e, (Union_, Join)):
            rel(e.left)
            rel(e.right)
        elif isinstance(e, Closure):
            rel(e.inner)

    for f in walk(formula):
        if isinstance(f, Atom):
            names.add(f.symbol.name)
        elif isinstance(f, RelAtom):
            rel(f.expr)
    return names


# --- transformations ---------------------------------------------------------------

def substitute(formula: Formula, var: Var, value: Const) -> Formula:
    """Replace the free occurrences of ``var`` with the constant ``value``."""
    if not isinstance(value, Const):
        raise TypeError("substitution target must be a constant")
    if value.sort != var.sort:
        raise ValueError(f"cannot substitute {value} of sort {value.sort.value} for {var.name}:{var.sort.value}")

    def term(t):
        return value if t == var else t

    def go(f):
        if isinstance(f, Atom):
            return Atom(f.symbol, tuple(term(a) for a in f.args))
        if isinstance(f, RelAtom):
            return RelAtom(f.expr, term(f.left), term(f.right))
        if isinstance(f, Eq):
            return Eq(term(f.left), term(f.right))
        if isinstance(f, Not):
            return Not(go(f.body))
        if isinstance(f, And):
            return And(tuple(go(a) for a in f.args))
        if isinstance(f, Or):
            return Or(tuple(go(a) for a in f.args))
        if isinstance(f, Implies):
            return Implies(go(f.left), go(f.right))
        if isinstance(f, (Forall, Exists)):
            if f.var.name == var.name:
                return f
            return type(f)(f.var, go(f.body))
        raise TypeError(f"not a formula: {f!r}")

    return go(formula)


def rename_symbols(formula: Formula, mapping: Mapping[str, RelationSymbol]) -> Formula:
    """Replace relation symbols by name, e.g. ``co`` -> ``co_N``."""

    def rel(e):
        if isinstance(e, Rel):
            return Rel(mapping.get(e.symbol.name, e.symbol))
        if isinstance(e, Union_):
            return Union_(rel(e.left), rel(e.right))
        if isinstance(e, Join):
            return Join(rel(e.left), rel(e.right))
        if isinstance(e, Closure):
            return Closure(rel(e.inner))
        return e

    def go(f):
        if isinstance(f, Atom):
            return Atom(mapping.get(f.symbol.name, f.symbol), f.args)
        if isinstance(f, RelAtom):
            return RelAtom(rel(f.expr), f.left, f.right)
        if isinstance(f, Eq):
            return f
        if isinstance(f, Not):
            return Not(go(f.body))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(go(a) for a in f.args))
        if isinstance(f, Implies):
            return Implies(go(f.left), go(f.right))
        return type(f)(f.var, go(f.body))

    return go(formula)


# --- semantics -------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteStructure:
    """Finite domains plus an interpretation of every relation symbol.

    ``sizes`` maps each sort to its domain size; ``relations`` maps each
    symbol to a set of tuples of domain indices.
    """

    sizes: Mapping[Sort, int]
    relations: Mapping[RelationSymbol, frozenset]
    _by_name: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        for s in Sort:
            if self.sizes.get(s, 0) < 1:
                raise ValueError(f"domain of {s.value} must be non-empty")
        for sym, tuples in self.relations.items():
            for tup in tuples:
                if len(tup) != sym.arity or any(
                    not 0 <= i < self.sizes[srt] for i, srt in zip(tup, sym.sorts)
                ):
                    raise ValueError(f"tuple {tup} out of bounds for {sym.name}")
        object.__setattr__(self, "_by_name", {s.name: (s, frozenset(t)) for s, t in self.relations.items()})

    def relation(self, name: str) -> frozenset:
        try:
            return self._by_name[name][1]
        except KeyError:
            raise KeyError(f"structure does not interpret {name}") from None

    def symbol(self, name: str) -> RelationSymbol:
        return self._by_name[name][0]

    @property
    def signature(self) -> tuple[RelationSymbol, ...]:
        return tuple(s for s, _ in self._by_name.values())


def compose(left: Iterable[tuple], right: Iterable[tuple]) -> frozenset:
    succ: dict[int, set] = {}
    for b, c in right:
        succ.setdefault(b, set()).add(c)
    return frozenset((a, c) for a, b in left for c in succ.get(b, ()))


def transitive_closure(pairs: Iterable[tuple]) -> frozenset:
    """Least transitive superset, by fixpoint of composition and union."""
    result = frozenset(pairs)
    while True:
        step = result | compose(result, result)
        if step == result:
            return result
        result = step


def closure_by_squaring(pairs: Iterable[tuple], n: int) -> frozenset:
    """Transitive closure over an ``n``-element domain in ceil(log2 n) squarings."""
    result = frozenset(pairs)
    for _ in range(math.ceil(math.log2(n)) if n > 1 else 0):
        result = result | compose(result, result)
    return result


def reads_from(structure: FiniteStructure) -> frozenset:
    writers: dict[tuple, set] = {}
    for t, x, v in structure.relation("writes"):
        writers.setdefault((x, v), set()).add(t)
    return frozenset(
        (a, b) for b, x, v in structure.relation("reads") for a in writers.get((x, v), ())
    )


def rel_evaluate(expr: RelExpr, structure: FiniteStructure) -> frozenset:
    if isinstance(expr, Rel):
        return structure.relation(expr.symbol.name)
    if isinstance(expr, ReadsFrom):
        return reads_from(structure)
    if isinstance(expr, Union_):
        return rel_evaluate(expr.left, structure) | rel_evaluate(expr.right, structure)
    if isinstance(expr, Join):
        return compose(rel_evaluate(expr.left, structure), rel_evaluate(expr.right, structure))
    if isinstance(expr, Closure):
        return transitive_closure(rel_evaluate(expr.inner, structure))
    raise TypeError(f"not a relation expression: {expr!r}")


def evaluate(formula: Formula, structure: FiniteStructure) -> bool:
    """Tarskian truth value of a closed formula in a finite structure."""
    return compile_formula(formula)(structure)


def evaluate_env(formula: Formula, structure: FiniteStructure, env: Mapping[str, int] | None = None) -> bool:
    """Direct recursive interpreter with an explicit variable environment.

    Slower than :func:`evaluate`; kept as a second, independent route.
    """
    env = dict(env or {})
    cache: dict = {}

    def val(t):
        if isinstance(t, Const):
            return t.index
        try:
            return env[t.name]
        except KeyError:
            raise ValueError(f"unbound variable {t.name}") from None

    def go(f) -> bool:
        if isinstance(f, Atom):
            return tuple(val(a) for a in f.args) in structure.relation(f.symbol.name)
        if isinstance(f, RelAtom):
            if f.expr not in cache:
                cache[f.expr] = rel_evaluate(f.expr, structure)
            return (val(f.left), val(f.right)) in cache[f.expr]
        if isinstance(f, Eq):
            return val(f.left) == val(f.right)
        if isinstance(f, Not):
            return not go(f.body)
        if isinstance(f, And):
            return all(go(a) for a in f.args)
        if isinstance(f, Or):
            return any(go(a) for a in f.args)
        if isinstance(f, Implies):
            return (not go(f.left)) or go(f.right)
        if isinstance(f, (Forall, Exists)):
            saved = env.get(f.var.name)
            quant = all if isinstance(f, Forall) else any
            try:
                def each():
                    for d in range(structure.sizes[f.var.sort]):
                        env[f.var.name] = d
                        yield go(f.body)
                return quant(each())
            finally:
                if saved is None:
                    env.pop(f.var.name, None)
                else:
                    env[f.var.name] = saved
        raise TypeError(f"not a formula: {f!r}")

    return go(formula)


# Compiled evaluation: the formula is turned once into nested closures over a
# slot array, then run against any number of structures. Used by the oracle,
# which evaluates the same formulas against thousands of structures.

_Compiled = Callable[[list, "_Ctx"], bool]


class _Ctx:
    __slots__ = ("structure", "rels", "cache")

    def __init__(self, structure):
        self.structure = structure
        self.rels = {name: tup for name, (_, tup) in structure._by_name.items()}
        self.cache = {}


def compile_formula(formula: Formula) -> Callable[[FiniteStructure], bool]:
    slots: dict[str, int] = {}

    def term(t):
        if isinstance(t, Const):
            k = t.index
            return lambda env: k
        if t.name not in slots:
            raise ValueError(f"unbound variable {t.name}")
        i = slots[t.name]
        return lambda env: env[i]

    def comp(f, depth=0) -> _Compiled:
        if isinstance(f, Atom):
            name = f.symbol.name
            getters = [term(a) for a in f.args]
            if all(isinstance(a, Var) for a in f.args):
                idx = tuple(slots[a.name] for a in f.args)
                if len(idx) == 2:
                    i, j = idx
                    return lambda env, ctx: (env[i], env[j]) in ctx.rels[name]
                if len(idx) == 3:
                    i, j, k = idx
                    return lambda env, ctx: (env[i], env[j], env[k]) in ctx.rels[name]
            return lambda env, ctx: tuple(g(env) for g in getters) in ctx.rels[name]
        if isinstance(f, RelAtom):
            expr = f.expr
            gl, gr = term(f.left), term(f.right)

            def rel_atom(env, ctx):
                r = ctx.cache.get(expr)
                if r is None:
                    r = ctx.cache[expr] = rel_evaluate(expr, ctx.structure)
                return (gl(env), gr(env)) in r
            return rel_atom
        if isinstance(f, Eq):
            gl, gr = term(f.left), term(f.right)
            return lambda env, ctx: gl(env) == gr(env)
        if isinstance(f, Not):
            b = comp(f.body, depth)
            return lambda env, ctx: not b(env, ctx)
        if isinstance(f, And):
            parts = [comp(a, depth) for a in f.args]
            return lambda env, ctx: all(p(env, ctx) for p in parts)
        if isinstance(f, Or):
            parts = [comp(a, depth) for a in f.args]
            return lambda env, ctx: any(p(env, ctx) for p in parts)
        if isinstance(f, Implies):
            l, r = comp(f.left, depth), comp(f.right, depth)
            return lambda env, ctx: (not l(env, ctx)) or r(env, ctx)
        if isinstance(f, (Forall, Exists)):
            saved = slots.get(f.var.name)
            i = slots[f.var.name] = depth
            body = comp(f.body, depth + 1)
            if saved is None:
                del slots[f.var.name]
            else:
                slots[f.var.name] = saved
            sort = f.var.sort
            if isinstance(f, Forall):
                def quant(env, ctx):
                    for d in range(ctx.structure.sizes[sort]):
                        env[i] = d
                        if not body(env, ctx):
                            return False
                    return True
            else:
                def quant(env, ctx):
                    for d in range(ctx.structure.sizes[sort]):
                        env[i] = d
                        if body(env, ctx):
                            return True
                    return False
            return quant
        raise TypeError(f"not a formula: {f!r}")

    top = comp(formula)
    width = _max_depth(formula) + 1

    def run(structure: FiniteStructure) -> bool:
        return top([0] * width, _Ctx(structure))

    return run


def _max_depth(formula: Formula) -> int:
    def go(f):
        if isinstance(f, Not):
            return go(f.body)
        if isinstance(f, (And, Or)):
            return max((go(a) for a in f.args), default=0)
        if isinstance(f, Implies):
            return max(go(f.left), go(f.right))
        if isinstance(f, (Forall, Exists)):
            return 1 + go(f.body)
        return 0
    return go(formula)


def structure_assignments(sizes: Mapping[Sort, int], symbol: RelationSymbol):
    """All tuples over a symbol's signature, in lexicographic domain order."""
    return itertools.product(*(range(sizes[s]) for s in symbol.sorts))
