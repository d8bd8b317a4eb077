"""Frameworks, the built-in isolation level catalog, and history well-formedness."""
from __future__ import annotations

from dataclasses import dataclass

from .fol import (
    BASE_SIGNATURE,
    OBJ,
    READS,
    SO,
    TXN,
    VAL,
    WR,
    WRITES,
    And,
    Atom,
    Closure,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Join,
    Not,
    Or,
    Rel,
    RelAtom,
    RelationSymbol,
    Union_,
    Var,
    check_well_formed,
    conj,
    constants,
    disj,
    forall,
    neq,
)

# Bound-variable name used by macro expansions. '#' cannot appear in DSL
# identifiers, so expansions never capture or shadow user variables.
MACRO_VAL = "v#"


def v(name: str, sort=TXN) -> Var:
    return Var(name, sort)


def writes_x(t, x) -> Formula:
    """t writes some value to x."""
    n = Var(MACRO_VAL, VAL)
    return Exists(n, Atom(WRITES, (t, x, n)))


def wr_x(x, a, b) -> Formula:
    """b reads from a on object x."""
    n = Var(MACRO_VAL, VAL)
    return Exists(n, And((Atom(WRITES, (a, x, n)), Atom(READS, (b, x, n)))))


def rel(symbol: RelationSymbol, a, b) -> Formula:
    return Atom(symbol, (a, b))


@dataclass(frozen=True)
class Framework:
    name: str
    aux: tuple[RelationSymbol, ...]
    axioms: Formula
    total_orders: tuple[str, ...] = ()
    # aux name -> aux name it is contained in; used by the oracle to enumerate
    contained_in: tuple[tuple[str, str], ...] = ()

    @property
    def signature(self) -> tuple[RelationSymbol, ...]:
        return BASE_SIGNATURE + self.aux


@dataclass(frozen=True)
class LevelSpec:
    name: str
    framework: Framework
    formula: Formula

    def diagnostics(self) -> list[str]:
        out = [str(d) for d in check_well_formed(self.formula, self.framework.signature)]
        if constants(self.formula):
            out.append(f"level {self.name} mentions constants {sorted(map(str, constants(self.formula)))}")
        return out

    def __str__(self) -> str:
        return self.name


CO = RelationSymbol("co", (TXN, TXN))
VIS = RelationSymbol("vis", (TXN, TXN))
AR = RelationSymbol("ar", (TXN, TXN))

T1, T2, T3, T4 = v("t1"), v("t2"), v("t3"), v("t4")
X = Var("x", OBJ)
N = Var("v", VAL)
N2 = Var("v2", VAL)

SO_WR = Union_(Rel(SO), WR)


def irreflexive(r: RelationSymbol) -> Formula:
    return forall([T1], Not(rel(r, T1, T1)))


def transitive(r: RelationSymbol) -> Formula:
    return forall([T1, T2, T3], Implies(And((rel(r, T1, T2), rel(r, T2, T3))), rel(r, T1, T3)))


def total(r: RelationSymbol) -> Formula:
    return forall([T1, T2], Implies(neq(T1, T2), Or((rel(r, T1, T2), rel(r, T2, T1)))))


def included(expr, r: RelationSymbol) -> Formula:
    """expr ⊆ r, for a relation expression or symbol."""
    lhs = RelAtom(expr, T1, T2) if not isinstance(expr, RelationSymbol) else rel(expr, T1, T2)
    return forall([T1, T2], Implies(lhs, rel(r, T1, T2)))


def strict_total_order(r: RelationSymbol) -> Formula:
    return And((irreflexive(r), transitive(r), total(r)))


COMMIT_ORDER = Framework(
    "commit_order",
    (CO,),
    And((strict_total_order(CO), included(SO_WR, CO))),
    total_orders=("co",),
)

VISIBILITY = Framework(
    "visibility",
    (VIS, AR),
    And((strict_total_order(AR), irreflexive(VIS), included(VIS, AR))),
    total_orders=("ar",),
    contained_in=(("vis", "ar"),),
)

FRAMEWORKS = {f.name: f for f in (COMMIT_ORDER, VISIBILITY)}


def well_formedness() -> Formula:
    """History well-formedness over the base symbols."""
    a, b, c = T1, T2, T3
    functional = [
        forall([a, X, N, N2], Implies(And((Atom(r, (a, X, N)), Atom(r, (a, X, N2)))), Eq(N, N2)))
        for r in (WRITES, READS)
    ]
    unique_writer = forall([a, b, X, N], Implies(And((Atom(WRITES, (a, X, N)), Atom(WRITES, (b, X, N)))), Eq(a, b)))
    no_rw_same = forall([a, X, N, N2], Not(And((Atom(READS, (a, X, N)), Atom(WRITES, (a, X, N2))))))
    justified = forall([a, X, N], Implies(
        Atom(READS, (a, X, N)),
        Exists(b, And((neq(b, a), Atom(WRITES, (b, X, N))))),
    ))
    chains = [
        irreflexive(SO),
        transitive(SO),
        forall([a, b, c], Implies(And((rel(SO, a, c), rel(SO, b, c), neq(a, b))),
                                  Or((rel(SO, a, b), rel(SO, b, a))))),
        forall([a, b, c], Implies(And((rel(SO, a, b), rel(SO, a, c), neq(b, c))),
                                  Or((rel(SO, b, c), rel(SO, c, b))))),
    ]
    return And(tuple(functional) + (unique_writer, no_rw_same, justified) + tuple(chains))


def commit_order_axiom(relation) -> Formula:
    """∀x,t1,t2,t3. wr_x(t1,t2) ∧ writes_x(t3) ∧ t3≠t1 ∧ R(t3,t2) ⇒ co(t3,t1)."""
    return forall([X, T1, T2, T3], Implies(
        And((wr_x(X, T1, T2), writes_x(T3, X), neq(T3, T1), relation(T3, T2))),
        rel(CO, T3, T1),
    ))


def _ext() -> Formula:
    return forall([T2, X, N], Implies(
        Atom(READS, (T2, X, N)),
        Exists(T1, And((
            neq(T1, T2),
            rel(VIS, T1, T2),
            Atom(WRITES, (T1, X, N)),
            Forall(T3, Implies(
                And((neq(T3, T1), rel(VIS, T3, T2), Exists(N2, Atom(WRITES, (T3, X, N2))))),
                rel(AR, T3, T1),
            )),
        ))),
    ))


def _session() -> Formula:
    return included(SO, VIS)


def _prefix() -> Formula:
    return forall([T1, T2], Implies(RelAtom(Join(Rel(AR), Rel(VIS)), T1, T2), rel(VIS, T1, T2)))


def _noconflict() -> Formula:
    return forall([T1, T2], Implies(
        And((neq(T1, T2), Exists(X, And((writes_x(T1, X), writes_x(T2, X)))))),
        Or((rel(VIS, T1, T2), rel(VIS, T2, T1))),
    ))


def builtin_catalog() -> list[LevelSpec]:
    hb = Closure(SO_WR)
    ser_a = commit_order_axiom(lambda a, b: rel(CO, a, b))
    pc_a = commit_order_axiom(lambda a, b: Exists(T4, And((
        Or((Eq(T4, a), rel(CO, a, T4))), RelAtom(hb, T4, b),
    ))))
    cc_a = commit_order_axiom(lambda a, b: RelAtom(hb, a, b))
    ra_a = commit_order_axiom(lambda a, b: RelAtom(SO_WR, a, b))
    base_b = (_ext(), _session())
    return [
        LevelSpec("SER_A", COMMIT_ORDER, ser_a),
        LevelSpec("PC_A", COMMIT_ORDER, pc_a),
        LevelSpec("CC_A", COMMIT_ORDER, cc_a),
        LevelSpec("RA_A", COMMIT_ORDER, ra_a),
        LevelSpec("SER_B", VISIBILITY, And(base_b + (total(VIS),))),
        LevelSpec("SI_B", VISIBILITY, And(base_b + (_prefix(), _noconflict()))),
        LevelSpec("PC_B", VISIBILITY, And(base_b + (_prefix(),))),
        LevelSpec("CC_B", VISIBILITY, And(base_b + (transitive(VIS),))),
    ]


def catalog_by_name(extra: list[LevelSpec] = ()) -> dict[str, LevelSpec]:
    out = {l.name: l for l in builtin_catalog()}
    for level in extra:
        out[level.name] = level
    return out


def membership_formula(level: LevelSpec) -> Formula:
    """WF ∧ the framework's structural axioms ∧ the level formula."""
    return conj(well_formedness(), level.framework.axioms, level.formula)
