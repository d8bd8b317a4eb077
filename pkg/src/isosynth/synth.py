"""Counterexample-guided synthesis of distinguishing histories.

Given an allowed level P and a disallowed level N, search for a history H
within scope such that some auxiliary assignment makes H satisfy P while no
auxiliary assignment makes H satisfy N.

Candidate search proposes H together with a P-witness and a guessed N-violating
assignment. Verification asks whether any assignment satisfies N on the fixed
H; if one does, it is a counterexample and the candidate formula is
strengthened with "H does not satisfy N's framework axioms and N under that
assignment" (learning) or with a clause blocking exactly H (no-learning
baseline).
"""
from __future__ import annotations

import enum
import functools
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import prop as p
from .bounds import History, Scope, VarTable, decode_history, decode_relation, encode
from .cdcl import SolverTimeout
from .fol import BASE_SIGNATURE, RelationSymbol, evaluate, rename_symbols
from .levels import LevelSpec, membership_formula, well_formedness
from .translate import restrict, translate, translate_many

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SynthOptions:
    learning: bool = True
    smart_search: bool = True
    fixed_order: bool = True
    timeout: float | None = None  # seconds
    seed: int = 0


@dataclass(frozen=True)
class SynthProblem:
    allowed: LevelSpec
    disallowed: LevelSpec
    scope: Scope
    options: SynthOptions = SynthOptions()

    def __post_init__(self):
        for level in (self.allowed, self.disallowed):
            problems = level.diagnostics()
            if problems:
                raise ValueError(f"level {level.name} is not well formed: {'; '.join(problems)}")


@dataclass
class SynthStats:
    candidates: int = 0
    initial_clauses: int = 0
    solver_calls: int = 0
    wall_time: float = 0.0


class Status(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    TIMEOUT = "timeout"


@dataclass
class SynthOutcome:
    status: Status
    stats: SynthStats
    history: History | None = None
    # P's auxiliary relations for the reported history, by original symbol name
    witness: dict[str, frozenset] | None = None
    # the padded candidate and the learned constraints, for inspection
    raw_history: History | None = field(default=None, repr=False)
    learned: list = field(default_factory=list, repr=False)
    table: VarTable | None = field(default=None, repr=False)

    @property
    def sat(self) -> bool:
        return self.status is Status.SAT


class _Session:
    """Encoding shared by candidate search and verification for one problem."""

    def __init__(self, problem: SynthProblem):
        P, N = problem.allowed, problem.disallowed
        opts = problem.options
        self.shared = opts.smart_search and P.framework.name == N.framework.name
        if self.shared or not (_names(P.framework.aux) & _names(N.framework.aux)):
            p_map, n_map = {}, {}
        else:
            p_map = {s.name: RelationSymbol(f"{s.name}_P", s.sorts) for s in P.framework.aux}
            n_map = {s.name: RelationSymbol(f"{s.name}_N", s.sorts) for s in N.framework.aux}
        self.p_aux = [p_map.get(s.name, s) for s in P.framework.aux]
        self.n_aux = [n_map.get(s.name, s) for s in N.framework.aux]
        self.p_names = {p_map.get(s.name, s).name: s.name for s in P.framework.aux}
        signature = list(BASE_SIGNATURE) + self.p_aux + [s for s in self.n_aux if s not in self.p_aux]
        self.table = encode(problem.scope, signature)
        wf, p_struct, p_level, n_struct, n_level = translate_many(self.table, [
            well_formedness(),
            rename_symbols(P.framework.axioms, p_map),
            rename_symbols(P.formula, p_map),
            rename_symbols(N.framework.axioms, n_map),
            rename_symbols(N.formula, n_map),
        ])
        self.not_n = p.mk_not(n_level)
        self.n_check = p.mk_and((n_struct, n_level))
        self.not_n_check = p.mk_not(self.n_check)
        if self.shared:
            initial = [wf, p_struct, p_level, self.not_n]
        else:
            initial = [wf, p_struct, p_level, n_struct, self.not_n]
        if opts.fixed_order and not self.shared:
            for name in N.framework.total_orders:
                sym = n_map.get(name) or next(s for s in self.n_aux if s.name == name)
                initial.append(_canonical_order(self.table, sym))
        self.initial = p.mk_and(initial)

    def instance(self, model: list[bool], cnf: p.CNF) -> dict[int, bool]:
        return {v: (model[v] if v <= cnf.original_vars else False) for v in range(1, self.table.num_vars + 1)}


def _names(symbols) -> set[str]:
    return {s.name for s in symbols}


def _canonical_order(table: VarTable, sym: RelationSymbol) -> p.PropFormula:
    n = table.scope.txn
    return p.mk_and(
        p.Var(table.var(sym, i, j)) if i < j else p.Not(p.Var(table.var(sym, i, j)))
        for i in range(n) for j in range(n)
    )


class _Clock:
    def __init__(self, timeout: float | None):
        self.start = time.monotonic()
        self.deadline = None if timeout is None else self.start + timeout

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() > self.deadline

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def synth(problem: SynthProblem, backend=None, dimacs_dir=None) -> SynthOutcome:
    """Run the CEGIS loop; see the module docstring for the procedure."""
    opts = problem.options
    clock = _Clock(opts.timeout)
    stats = SynthStats()
    backend = backend or p.default_backend(opts.seed)
    dump = _Dumper(dimacs_dir)
    learned: list[p.PropFormula] = []

    def finish(status, **kw) -> SynthOutcome:
        stats.wall_time = clock.elapsed()
        return SynthOutcome(status, stats, learned=learned, **kw)

    def run(cnf):
        dump(cnf)
        stats.solver_calls += 1
        return p.solve_cnf(cnf, backend, clock.deadline)

    try:
        session = _Session(problem)
        table = session.table
        base_vars = [v for s in BASE_SIGNATURE for v in table.vars_of(s)]
        while True:
            if clock.expired():
                return finish(Status.TIMEOUT, table=table)
            cnf = p.tseitin(p.mk_and([session.initial] + learned))
            if stats.solver_calls == 0:
                stats.initial_clauses = len(cnf)
            model = run(cnf)
            if model is None:
                return finish(Status.UNSAT, table=table)
            instance = session.instance(model, cnf)
            candidate = decode_history(table, instance)
            assert candidate.is_wf(), f"candidate violates well-formedness: {candidate.wf_violations()}"

            if clock.expired():
                return finish(Status.TIMEOUT, table=table)
            check = restrict(session.n_check, table, BASE_SIGNATURE, instance)
            vcnf = p.tseitin(check)
            stats.candidates += 1
            cex_model = run(vcnf)
            if cex_model is None:
                history, witness = _report(problem, session, candidate, instance)
                return finish(Status.SAT, history=history, witness=witness, raw_history=candidate, table=table)
            cex = session.instance(cex_model, vcnf)
            if opts.learning:
                # N's structural axioms mention the history (so and wr inside co), so the
                # learned fact must be "not (struct_N and N)" under cex; plain "not N" can
                # exclude a history for which cex is not even a legal assignment.
                learned.append(restrict(session.not_n_check, table, session.n_aux, cex))
            else:
                learned.append(p.mk_or(p.mk_not(p.Var(v)) if instance[v] else p.Var(v) for v in base_vars))
            log.debug("candidate %d rejected", stats.candidates)
    except SolverTimeout:
        return finish(Status.TIMEOUT)


def _report(problem: SynthProblem, session: _Session, candidate: History, instance) -> tuple[History, dict]:
    """Strip empty transactions and double-check the result against P by evaluation."""
    history, mapping = candidate.strip_empty()
    witness = {}
    for sym in session.p_aux:
        pairs = decode_relation(session.table, instance, sym)
        witness[session.p_names[sym.name]] = frozenset(
            (mapping[a], mapping[b]) for a, b in pairs if a in mapping and b in mapping
        )
    scope = problem.scope
    small = Scope(max(len(mapping), 1), scope.obj, scope.val)
    aux = {s: witness[s.name] for s in problem.allowed.framework.aux}
    if not evaluate(membership_formula(problem.allowed), history.to_structure(small, aux)):
        raise AssertionError("synthesized history does not satisfy the allowed level with its witness")
    return history, witness


class _Dumper:
    def __init__(self, directory):
        self.dir = Path(directory) if directory else None
        self.count = 0
        if self.dir:
            self.dir.mkdir(parents=True, exist_ok=True)

    def __call__(self, cnf: p.CNF):
        if self.dir is None:
            return
        p.export_dimacs(cnf.clauses, self.dir / f"query_{self.count:04d}.cnf", cnf.num_vars)
        self.count += 1


# --- membership, refinement, equivalence ------------------------------------------------

@dataclass(frozen=True)
class Membership:
    allowed: bool
    witness: dict[str, frozenset] | None = None


@functools.lru_cache(maxsize=64)
def _membership_encoding(level: LevelSpec, scope: Scope):
    table = encode(scope, level.framework.signature)
    return table, translate(table, membership_formula(level))


def check_membership(level: LevelSpec, history: History, scope: Scope | None = None,
                     backend=None) -> Membership:
    """Is there an auxiliary assignment under which ``history`` satisfies ``level``?"""
    if scope is None:
        scope = Scope(*history.max_indices())
    if not history.fits(scope):
        raise ValueError(f"history does not fit in scope {scope}")
    problems = history.wf_violations()
    if problems:
        raise ValueError("history is not well formed: " + "; ".join(problems))
    table, formula = _membership_encoding(level, scope)
    fixed = restrict(formula, table, BASE_SIGNATURE, history.to_instance(table))
    model = p.solve(fixed, range(1, table.num_vars + 1), backend=backend)
    if model is None:
        return Membership(False)
    return Membership(True, {s.name: decode_relation(table, model, s) for s in level.framework.aux})


class Verdict(enum.Enum):
    HOLDS = "holds-within-scope"
    COUNTEREXAMPLE = "counterexample"
    UNKNOWN = "indeterminate"


@dataclass
class Refinement:
    verdict: Verdict
    outcome: SynthOutcome

    @property
    def history(self) -> History | None:
        return self.outcome.history


def refines(a: LevelSpec, b: LevelSpec, scope: Scope, options: SynthOptions = SynthOptions(),
            backend=None) -> Refinement:
    """Does every a-allowed history within scope also satisfy b?"""
    out = synth(SynthProblem(a, b, scope, options), backend=backend)
    verdict = {Status.UNSAT: Verdict.HOLDS, Status.SAT: Verdict.COUNTEREXAMPLE}.get(out.status, Verdict.UNKNOWN)
    return Refinement(verdict, out)


@dataclass
class Equivalence:
    forward: Refinement   # a refines b
    backward: Refinement  # b refines a

    @property
    def equivalent(self) -> bool | None:
        verdicts = {self.forward.verdict, self.backward.verdict}
        if Verdict.COUNTEREXAMPLE in verdicts:
            return False
        if Verdict.UNKNOWN in verdicts:
            return None
        return True

    @property
    def witnesses(self) -> list[History]:
        return [r.history for r in (self.forward, self.backward) if r.history is not None]


def equivalent(a: LevelSpec, b: LevelSpec, scope: Scope, options: SynthOptions = SynthOptions(),
               backend=None) -> Equivalence:
    return Equivalence(refines(a, b, scope, options, backend), refines(b, a, scope, options, backend))
