"""Propositional formulas, Tseitin CNF conversion, SAT solving, DIMACS I/O.

Grounded formulas are DAGs: the same node object may be reachable along many
paths. Every traversal here memoizes on node identity so shared structure is
processed once, and Tseitin allocates one fresh variable per distinct node.
"""
from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

from . import cdcl
from .cdcl import SolverTimeout

SAT_CMD_ENV = "ISOLDE_SAT_CMD"


@dataclass(frozen=True, slots=True)
class Var:
    id: int

    def __str__(self) -> str:
        return f"p{self.id}"


@dataclass(frozen=True, slots=True)
class Const:
    value: bool

    def __str__(self) -> str:
        return "T" if self.value else "F"


@dataclass(frozen=True, slots=True)
class Not:
    body: "PropFormula"

    def __str__(self) -> str:
        return f"~{self.body}"


@dataclass(frozen=True, slots=True)
class And:
    args: tuple

    def __str__(self) -> str:
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True, slots=True)
class Or:
    args: tuple

    def __str__(self) -> str:
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True, slots=True)
class Implies:
    left: "PropFormula"
    right: "PropFormula"

    def __str__(self) -> str:
        return f"({self.left} -> {self.right})"


PropFormula = Union[Var, Const, Not, And, Or, Implies]

TRUE = Const(True)
FALSE = Const(False)


class SolverError(RuntimeError):
    """The SAT backend failed; distinct from an UNSAT verdict."""


# --- smart constructors (fold constants eagerly) ------------------------------------

def mk_not(f: PropFormula) -> PropFormula:
    if f is TRUE or f == TRUE:
        return FALSE
    if f is FALSE or f == FALSE:
        return TRUE
    if isinstance(f, Not):
        return f.body
    return Not(f)


def mk_and(parts: Iterable[PropFormula]) -> PropFormula:
    out = []
    for p in parts:
        if isinstance(p, Const):
            if not p.value:
                return FALSE
            continue
        out.append(p)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def mk_or(parts: Iterable[PropFormula]) -> PropFormula:
    out = []
    for p in parts:
        if isinstance(p, Const):
            if p.value:
                return TRUE
            continue
        out.append(p)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def mk_implies(a: PropFormula, b: PropFormula) -> PropFormula:
    if isinstance(a, Const):
        return b if a.value else TRUE
    if isinstance(b, Const):
        return TRUE if b.value else mk_not(a)
    return Implies(a, b)


# --- traversal helpers --------------------------------------------------------------

def _children(f):
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Implies):
        return (f.left, f.right)
    return ()


def _postorder(root):
    """Distinct nodes (by identity) in post-order, iteratively."""
    seen: set[int] = set()
    order = []
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in _children(node):
            if id(c) not in seen:
                stack.append((c, False))
    return order


def variables(f: PropFormula) -> set[int]:
    return {n.id for n in _postorder(f) if isinstance(n, Var)}


def size(f: PropFormula) -> int:
    """Number of distinct nodes."""
    return len(_postorder(f))


def evaluate(f: PropFormula, assignment) -> bool:
    """Truth value under ``assignment`` (var id -> bool)."""
    memo: dict[int, bool] = {}
    for n in _postorder(f):
        if isinstance(n, Var):
            r = bool(assignment[n.id])
        elif isinstance(n, Const):
            r = n.value
        elif isinstance(n, Not):
            r = not memo[id(n.body)]
        elif isinstance(n, And):
            r = all(memo[id(a)] for a in n.args)
        elif isinstance(n, Or):
            r = any(memo[id(a)] for a in n.args)
        else:
            r = (not memo[id(n.left)]) or memo[id(n.right)]
        memo[id(n)] = r
    return memo[id(f)]


def rebuild(f: PropFormula, leaf) -> PropFormula:
    """Rebuild ``f`` bottom-up, mapping variables through ``leaf`` and folding constants.

    ``leaf(var_id)`` returns a replacement formula or None to keep the variable.
    Unchanged subtrees are returned as the same objects, preserving sharing.
    """
    memo: dict[int, PropFormula] = {}
    for n in _postorder(f):
        if isinstance(n, Var):
            r = leaf(n.id)
            r = n if r is None else r
        elif isinstance(n, Const):
            r = n
        elif isinstance(n, Not):
            b = memo[id(n.body)]
            r = n if (b is n.body and not isinstance(b, (Not, Const))) else mk_not(b)
        elif isinstance(n, (And, Or)):
            args = [memo[id(a)] for a in n.args]
            if all(x is y for x, y in zip(args, n.args)) and not any(isinstance(a, Const) for a in args):
                r = n
            else:
                r = mk_and(args) if isinstance(n, And) else mk_or(args)
        else:
            a, b = memo[id(n.left)], memo[id(n.right)]
            r = n if (a is n.left and b is n.right and not isinstance(a, Const)
                      and not isinstance(b, Const)) else mk_implies(a, b)
        memo[id(n)] = r
    return memo[id(f)]


def simplify(f: PropFormula) -> PropFormula:
    """Constant folding and double-negation removal."""
    return rebuild(f, lambda v: None)


def substitute(f: PropFormula, values) -> PropFormula:
    """Replace variables by constants (``values``: var id -> bool) and fold."""
    def leaf(v):
        if v in values:
            return TRUE if values[v] else FALSE
        return None
    return rebuild(f, leaf)


# --- CNF ------------------------------------------------------------------------------

@dataclass
class CNF:
    clauses: list[list[int]]
    num_vars: int
    original_vars: int

    def __len__(self) -> int:
        return len(self.clauses)


def tseitin(f: PropFormula, first_fresh: int | None = None, polarity: bool = True) -> CNF:
    """Equisatisfiable CNF with one fresh variable per distinct compound node.

    With ``polarity`` (the default) each definition is emitted only in the
    direction(s) in which the node occurs (Plaisted-Greenbaum); otherwise both
    directions are emitted. Either way every model of the CNF, restricted to
    the original variables, satisfies ``f``. Top-level conjunctions and
    disjunctions are asserted directly rather than through a definition.
    """
    f = simplify(f)
    orig = max(variables(f), default=0)
    fresh = max(orig, (first_fresh or 1) - 1)
    if isinstance(f, Const):
        return CNF([] if f.value else [[]], orig, orig)

    # Split the root into asserted clauses of subformulas.
    roots = []
    stack = [f]
    while stack:
        n = stack.pop()
        if isinstance(n, And):
            stack.extend(reversed(n.args))
        elif isinstance(n, Not) and isinstance(n.body, Or):
            stack.extend(mk_not(a) for a in reversed(n.body.args))
        elif isinstance(n, Not) and isinstance(n.body, Implies):
            stack.extend((mk_not(n.body.right), n.body.left))
        else:
            roots.append(n)
    asserted: list[list] = []
    for r in roots:
        if isinstance(r, Or):
            asserted.append(list(r.args))
        elif isinstance(r, Implies):
            asserted.append([mk_not(r.left), r.right])
        else:
            asserted.append([r])

    POS, NEG = 1, 2
    order = _postorder(And(tuple(p for clause in asserted for p in clause)))
    order.pop()  # the synthetic root
    pol: dict[int, int] = {}
    for clause in asserted:
        for part in clause:
            pol[id(part)] = pol.get(id(part), 0) | POS
    for n in reversed(order):
        m = pol.get(id(n), 0) if polarity else POS | NEG
        if isinstance(n, Not):
            flip = ((m & POS) << 1) | ((m & NEG) >> 1)
            pol[id(n.body)] = pol.get(id(n.body), 0) | flip
        elif isinstance(n, (And, Or)):
            for a in n.args:
                pol[id(a)] = pol.get(id(a), 0) | m
        elif isinstance(n, Implies):
            flip = ((m & POS) << 1) | ((m & NEG) >> 1)
            pol[id(n.left)] = pol.get(id(n.left), 0) | flip
            pol[id(n.right)] = pol.get(id(n.right), 0) | m

    clauses: list[list[int]] = []
    lits: dict[int, int] = {}
    for n in order:
        if isinstance(n, Var):
            lits[id(n)] = n.id
            continue
        if isinstance(n, Not):
            lits[id(n)] = -lits[id(n.body)]
            continue
        m = pol.get(id(n), 0) if polarity else POS | NEG
        fresh += 1
        g = fresh
        lits[id(n)] = g
        if isinstance(n, Implies):
            a, b = lits[id(n.left)], lits[id(n.right)]
            if m & POS:
                clauses.append([-g, -a, b])
            if m & NEG:
                clauses.append([g, a])
                clauses.append([g, -b])
        elif isinstance(n, And):
            args = [lits[id(a)] for a in n.args]
            if m & POS:
                clauses.extend([-g, a] for a in args)
            if m & NEG:
                clauses.append([g] + [-a for a in args])
        else:
            args = [lits[id(a)] for a in n.args]
            if m & POS:
                clauses.append([-g] + args)
            if m & NEG:
                clauses.extend([g, -a] for a in args)
    for clause in asserted:
        clauses.append([lits[id(p)] for p in clause])
    return CNF(clauses, fresh, orig)


def to_cnf(f: PropFormula) -> list[list[int]]:
    return tseitin(f).clauses


# --- DIMACS -------------------------------------------------------------------------

def dimacs_text(clauses: Sequence[Sequence[int]], num_vars: int | None = None) -> str:
    if num_vars is None:
        num_vars = max((abs(l) for c in clauses for l in c), default=0)
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    lines += [" ".join(map(str, c)) + (" 0" if c else "0") for c in clauses]
    return "\n".join(lines) + "\n"


def export_dimacs(clauses: Sequence[Sequence[int]], path, num_vars: int | None = None) -> Path:
    path = Path(path)
    path.write_text(dimacs_text(clauses, num_vars))
    return path


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    num_vars, clauses, current = 0, [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    return num_vars, clauses


def parse_solver_output(text: str, num_vars: int) -> list[bool] | None:
    """Parse competition-format output (``s`` and ``v`` lines)."""
    status = None
    model = [False] * (num_vars + 1)
    for line in text.splitlines():
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v "):
            for tok in line[2:].split():
                lit = int(tok)
                if lit and abs(lit) <= num_vars:
                    model[abs(lit)] = lit > 0
    if status == "UNSATISFIABLE":
        return None
    if status == "SATISFIABLE":
        return model
    raise SolverError(f"external solver gave no verdict (status line: {status!r})")


# --- backends -------------------------------------------------------------------------

class EmbeddedBackend:
    """The pure-Python CDCL solver in module cdcl; needs nothing beyond the stdlib."""

    name = "cdcl"

    def __init__(self, seed: int = 0):
        self.seed = seed

    def solve_cnf(self, cnf: CNF, deadline: float | None = None) -> list[bool] | None:
        return cdcl.solve_clauses(cnf.num_vars, cnf.clauses, self.seed, deadline)


class ExternalBackend:
    """Runs ``<command> <file.cnf>`` and reads ``s``/``v`` lines from stdout."""

    name = "external"

    def __init__(self, command: str):
        self.command = shlex.split(command)
        if not self.command:
            raise SolverError(f"{SAT_CMD_ENV} is empty")

    def solve_cnf(self, cnf: CNF, deadline: float | None = None) -> list[bool] | None:
        timeout = None
        if deadline is not None:
            timeout = max(deadline - time.monotonic(), 0.001)
        with tempfile.TemporaryDirectory() as tmp:
            path = export_dimacs(cnf.clauses, Path(tmp) / "query.cnf", cnf.num_vars)
            try:
                proc = subprocess.run(self.command + [str(path)], capture_output=True,
                                      text=True, timeout=timeout)
            except subprocess.TimeoutExpired:
                raise SolverTimeout() from None
            except OSError as e:
                raise SolverError(f"cannot run external solver: {e}") from None
        # Competition solvers exit 10 (SAT) / 20 (UNSAT); anything else besides 0 is a failure.
        if proc.returncode not in (0, 10, 20):
            raise SolverError(f"external solver exited with {proc.returncode}: {proc.stderr.strip()[:200]}")
        return parse_solver_output(proc.stdout, cnf.num_vars)


class PysatBackend:
    """In-process CaDiCaL through python-sat.

    The deadline is enforced between conflict-budgeted chunks, since CaDiCaL
    cannot be interrupted mid-search; learned clauses survive across chunks.
    """

    name = "cadical"
    solver_name = "cadical153"

    def __init__(self, seed: int = 0):
        from pysat.solvers import Solver as _Solver  # optional dependency
        self._solver_cls = _Solver
        self.seed = seed  # CaDiCaL is deterministic for a fixed input; kept for API symmetry

    def solve_cnf(self, cnf: CNF, deadline: float | None = None) -> list[bool] | None:
        with self._solver_cls(name=self.solver_name, bootstrap_with=cnf.clauses) as s:
            if deadline is None:
                result = s.solve()
            else:
                budget = 2000
                while True:
                    if time.monotonic() > deadline:
                        raise SolverTimeout()
                    s.conf_budget(budget)
                    result = s.solve_limited()
                    if result is not None:
                        break
                    budget = min(budget * 2, 200_000)
            if not result:
                return None
            model = [False] * (cnf.num_vars + 1)
            for lit in s.get_model() or ():
                if abs(lit) <= cnf.num_vars:
                    model[abs(lit)] = lit > 0
            return model


BACKENDS = {"cdcl": EmbeddedBackend, "cadical": PysatBackend}


def pysat_available() -> bool:
    try:
        import pysat.solvers  # noqa: F401
    except ImportError:
        return False
    return True


def make_backend(name: str = "auto", seed: int = 0):
    """``auto``: $ISOLDE_SAT_CMD if set, else CaDiCaL if python-sat is installed, else cdcl."""
    if name == "auto":
        cmd = os.environ.get(SAT_CMD_ENV)
        if cmd:
            return ExternalBackend(cmd)
        name = "cadical" if pysat_available() else "cdcl"
    if name == "external":
        cmd = os.environ.get(SAT_CMD_ENV)
        if not cmd:
            raise SolverError(f"{SAT_CMD_ENV} is not set")
        return ExternalBackend(cmd)
    if name not in BACKENDS:
        raise SolverError(f"unknown backend {name}")
    return BACKENDS[name](seed)


def default_backend(seed: int = 0):
    return make_backend("auto", seed)


def solve(f: PropFormula, variables_of_interest: Iterable[int] = (), backend=None,
          deadline: float | None = None) -> dict[int, bool] | None:
    """Return a satisfying instance, or None when ``f`` is unsatisfiable.

    The instance covers every variable of ``f`` plus ``variables_of_interest``
    (those absent from ``f`` are reported False). Tseitin variables are withheld.
    """
    cnf = tseitin(f)
    model = solve_cnf(cnf, backend, deadline)
    if model is None:
        return None
    wanted = set(variables(f)) | set(variables_of_interest)
    return {v: (model[v] if v <= cnf.original_vars else False) for v in sorted(wanted)}


def solve_cnf(cnf: CNF, backend=None, deadline: float | None = None) -> list[bool] | None:
    backend = backend or default_backend()
    if any(len(c) == 0 for c in cnf.clauses):
        return None
    if not cnf.clauses:
        return [False] * (cnf.num_vars + 1)
    model = backend.solve_cnf(cnf, deadline)
    if model is not None:
        for clause in cnf.clauses:
            if not any(model[l] if l > 0 else not model[-l] for l in clause):
                raise SolverError(f"{backend.name} backend returned a model violating clause {clause}")
    return model
