"""Seeded generators shared by the property tests and the acceptance suite."""
from __future__ import annotations

import itertools
import random

from isosynth import prop as p
from isosynth.bounds import Scope, decode_relation, encode
from isosynth.fol import (
    BASE_SIGNATURE, OBJ, READS, SO, TXN, VAL, WR, WRITES,
    And, Atom, Closure, Const, Eq, Exists, FiniteStructure, Forall, Implies, Join, Not, Or, Rel, RelAtom,
    RelationSymbol, Union_, Var,
)
from isosynth.levels import CO

SIGNATURE = BASE_SIGNATURE + (CO,)
NAMES = {TXN: ["a", "b", "c"], OBJ: ["x", "y"], VAL: ["m", "k"]}


def random_rexpr(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.4:
        return rng.choice([Rel(SO), Rel(CO), WR])
    kind = rng.choice(["union", "join", "closure"])
    if kind == "closure":
        return Closure(random_rexpr(rng, depth - 1))
    parts = (random_rexpr(rng, depth - 1), random_rexpr(rng, depth - 1))
    return Union_(*parts) if kind == "union" else Join(*parts)


def random_term(rng: random.Random, sort, bound: dict, scope: Scope):
    candidates = [Var(n, s) for n, s in bound.items() if s == sort]
    if candidates and rng.random() < 0.75:
        return rng.choice(candidates)
    return Const(rng.randrange(scope.sizes[sort]), sort)


def random_formula(rng: random.Random, depth: int, scope: Scope, bound: dict | None = None):
    """A closed formula (constants allowed) of quantifier/connective depth at most ``depth``."""
    bound = dict(bound or {})
    if depth <= 0 or rng.random() < 0.2:
        kind = rng.choice(["atom", "atom", "eq", "rel"])
        if kind == "eq":
            sort = rng.choice(list(NAMES))
            return Eq(random_term(rng, sort, bound, scope), random_term(rng, sort, bound, scope))
        if kind == "rel":
            return RelAtom(random_rexpr(rng, 2), random_term(rng, TXN, bound, scope),
                           random_term(rng, TXN, bound, scope))
        sym = rng.choice(SIGNATURE)
        return Atom(sym, tuple(random_term(rng, s, bound, scope) for s in sym.sorts))
    kind = rng.choice(["not", "and", "or", "implies", "forall", "exists"])
    if kind == "not":
        return Not(random_formula(rng, depth - 1, scope, bound))
    if kind in ("and", "or"):
        args = tuple(random_formula(rng, depth - 1, scope, bound) for _ in range(rng.randint(0, 3)))
        return And(args) if kind == "and" else Or(args)
    if kind == "implies":
        return Implies(random_formula(rng, depth - 1, scope, bound), random_formula(rng, depth - 1, scope, bound))
    sort = rng.choice(list(NAMES))
    var = Var(rng.choice(NAMES[sort]), sort)  # reuse of names exercises shadowing
    bound[var.name] = sort
    body = random_formula(rng, depth - 1, scope, bound)
    return Forall(var, body) if kind == "forall" else Exists(var, body)


def random_instance(rng: random.Random, table, density: float = 0.3) -> dict[int, bool]:
    return {v: rng.random() < density for v in range(1, table.num_vars + 1)}


def structure_of(table, instance) -> FiniteStructure:
    return FiniteStructure(table.scope.sizes, {
        table.symbol(s.name): decode_relation(table, instance, s) for s in table.symbols
    })


def random_prop(rng: random.Random, nvars: int, depth: int):
    if depth <= 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.05:
            return p.Const(rng.random() < 0.5)
        return p.Var(rng.randint(1, nvars))
    kind = rng.choice(["not", "and", "or", "implies"])
    if kind == "not":
        return p.Not(random_prop(rng, nvars, depth - 1))
    if kind == "implies":
        return p.Implies(random_prop(rng, nvars, depth - 1), random_prop(rng, nvars, depth - 1))
    args = tuple(random_prop(rng, nvars, depth - 1) for _ in range(rng.randint(1, 4)))
    return p.And(args) if kind == "and" else p.Or(args)


def truth_table_sat(f, nvars: int) -> bool:
    for bits in itertools.product([False, True], repeat=nvars):
        if p.evaluate(f, dict(enumerate(bits, start=1))):
            return True
    return False


def brute_force_cnf(num_vars: int, clauses) -> bool:
    for bits in itertools.product([False, True], repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def prop_corpus(count: int = 400, seed: int = 7) -> list[tuple[object, int]]:
    """Hand-picked formulas plus seeded random ones, all over at most 12 variables."""
    a, b, c = p.Var(1), p.Var(2), p.Var(3)
    corpus = [
        (p.TRUE, 1), (p.FALSE, 1), (a, 1), (p.And((a, p.Not(a))), 1),
        (p.And((p.Or((a, b)), p.Or((p.Not(a), b)))), 2),
        (p.And((p.Or((a, b)), p.Not(a))), 2),
        (p.Implies(p.FALSE, a), 1), (p.Not(p.Not(a)), 1),
        (p.And((p.Or((a, b, c)), p.Not(a), p.Not(b), p.Not(c))), 3),
    ]
    rng = random.Random(seed)
    for _ in range(count):
        n = rng.randint(1, 12)
        corpus.append((random_prop(rng, n, rng.randint(1, 6)), n))
    return corpus


def table_for(scope: Scope):
    return encode(scope, SIGNATURE)


# --- cached oracle verdicts ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []
_HISTORIES: dict = {}
_ORACLE: dict = {}


def histories(scope: Scope) -> list:
    if scope not in _HISTORIES:
        from isosynth.oracle import enum_histories
        _HISTORIES[scope] = list(enum_histories(scope))
    return _HISTORIES[scope]


def oracle_table(level, scope: Scope) -> list[bool]:
    """allowed_oracle(level, h) for every enumerated history h at ``scope``."""
    key = (level, scope)
    if key not in _ORACLE:
        from isosynth.oracle import allowed_oracle
        _ORACLE[key] = [allowed_oracle(level, h, scope) for h in histories(scope)]
    return _ORACLE[key]


def oracle_distinguishes(allowed, disallowed, scope: Scope) -> bool:
    """Same answer as synth_oracle(allowed, disallowed, scope).sat, from cached tables."""
    return any(a and not b for a, b in zip(oracle_table(allowed, scope), oracle_table(disallowed, scope)))
