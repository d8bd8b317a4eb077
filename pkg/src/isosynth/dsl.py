"""Parser for the level-specification language.

    level SerA {
      framework commit_order;
      let hb() = (so | wr)+;
      axiom forall x:Obj, t1:Txn, t2:Txn, t3:Txn .
        wr[x](t1,t2) && writesx(t3,x) && t3 != t1 && co(t3,t2) => co(t3,t1);
    }

A ``let`` with an empty parameter list defines a relation expression; with
parameters it defines a formula macro. ``wr[x](a,b)``, ``wr(a,b)`` and
``writesx(t,x)`` are built in.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from . import fol
from .fol import Sort
from .levels import FRAMEWORKS, Framework, LevelSpec, writes_x, wr_x

KEYWORDS = {"level", "framework", "let", "axiom", "forall", "exists"}
SORTS = {s.value: s for s in Sort}

_TOKEN = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>&&|\|\||=>|!=|[{}()\[\],;:.!=|+])
""", re.VERBOSE)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class LevelParseError(ValueError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(map(str, diagnostics)))


class _Abort(Exception):
    pass


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[_Tok]:
    toks, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise LevelParseError([Diagnostic(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        for i, ch in enumerate(m.group()):
            if ch == "\n":
                line += 1
                line_start = pos + i + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


def _rename_bound(f, taken: set[str], counter: list[int]):
    """Rename every binder in ``f`` whose name is in ``taken``."""
    def go(g, mapping):
        def term(t):
            return mapping.get(t.name, t) if isinstance(t, fol.Var) else t
        if isinstance(g, fol.Atom):
            return fol.Atom(g.symbol, tuple(term(a) for a in g.args))
        if isinstance(g, fol.RelAtom):
            return fol.RelAtom(g.expr, term(g.left), term(g.right))
        if isinstance(g, fol.Eq):
            return fol.Eq(term(g.left), term(g.right))
        if isinstance(g, fol.Not):
            return fol.Not(go(g.body, mapping))
        if isinstance(g, (fol.And, fol.Or)):
            return type(g)(tuple(go(a, mapping) for a in g.args))
        if isinstance(g, fol.Implies):
            return fol.Implies(go(g.left, mapping), go(g.right, mapping))
        var = g.var
        if var.name in taken:
            counter[0] += 1
            new = fol.Var(f"{var.name}#{counter[0]}", var.sort)
            return type(g)(new, go(g.body, {**mapping, var.name: new}))
        inner = {k: t for k, t in mapping.items() if k != var.name}
        return type(g)(var, go(g.body, inner))
    return go(f, {})


def _instantiate(body, params: list[fol.Var], args: list, counter: list[int]):
    """Substitute terms for macro parameters, renaming binders to avoid capture."""
    taken = {a.name for a in args if isinstance(a, fol.Var)} | {p.name for p in params}
    body = _rename_bound(body, taken, counter)
    mapping = {p.name: a for p, a in zip(params, args)}

    def term(t):
        return mapping.get(t.name, t) if isinstance(t, fol.Var) else t

    def go(g):
        if isinstance(g, fol.Atom):
            return fol.Atom(g.symbol, tuple(term(a) for a in g.args))
        if isinstance(g, fol.RelAtom):
            return fol.RelAtom(g.expr, term(g.left), term(g.right))
        if isinstance(g, fol.Eq):
            return fol.Eq(term(g.left), term(g.right))
        if isinstance(g, fol.Not):
            return fol.Not(go(g.body))
        if isinstance(g, (fol.And, fol.Or)):
            return type(g)(tuple(go(a) for a in g.args))
        if isinstance(g, fol.Implies):
            return fol.Implies(go(g.left), go(g.right))
        return type(g)(g.var, go(g.body))
    return go(body)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.diags: list[Diagnostic] = []
        self.counter = [0]

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        self.diags.append(Diagnostic(tok.line, tok.col, message))

    def fail(self, message: str, tok: _Tok | None = None):
        self.error(message, tok)
        raise _Abort()

    def expect(self, text: str) -> _Tok:
        if not self.at(text):
            found = self.tok.text or "end of file"
            self.fail(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> _Tok:
        if self.tok.kind != "ident":
            self.fail(f"expected {what}, found {self.tok.text or 'end of file'!r}")
        tok = self.tok
        self.i += 1
        return tok

    # file structure
    def parse_file(self) -> list[LevelSpec]:
        levels = []
        names = set()
        while self.tok.kind != "eof":
            start = self.tok
            before = len(self.diags)
            try:
                level = self.level()
            except _Abort:
                break
            if level is None:
                continue
            if level.name in names:
                self.error(f"duplicate level {level.name}", start)
            names.add(level.name)
            if len(self.diags) == before:
                for d in level.diagnostics():
                    self.error(d, start)
            levels.append(level)
        if self.diags:
            raise LevelParseError(self.diags)
        return levels

    def level(self) -> LevelSpec | None:
        self.expect("level")
        name = self.ident("level name").text
        self.expect("{")
        self.expect("framework")
        fw_tok = self.ident("framework name")
        framework = FRAMEWORKS.get(fw_tok.text)
        if framework is None:
            self.fail(f"unknown framework {fw_tok.text} (expected one of {', '.join(FRAMEWORKS)})", fw_tok)
        self.expect(";")
        self.framework = framework
        self.symbols = {s.name: s for s in framework.signature}
        self.rel_macros: dict[str, object] = {}
        self.formula_macros: dict[str, tuple] = {}
        axioms = []
        while not self.at("}"):
            if self.at("let"):
                self.let()
            elif self.at("axiom"):
                self.i += 1
                axioms.append(self.formula({}))
                if not self.at("}"):
                    self.expect(";")
            else:
                self.fail(f"expected 'let', 'axiom' or '}}', found {self.tok.text or 'end of file'!r}")
        self.expect("}")
        if not axioms:
            self.error(f"level {name} has no axiom")
            return None
        return LevelSpec(name, framework, axioms[0] if len(axioms) == 1 else fol.And(tuple(axioms)))

    def let(self):
        self.expect("let")
        name_tok = self.ident("macro name")
        name = name_tok.text
        if name in self.symbols or name in KEYWORDS or name in ("wr", "writesx"):
            self.fail(f"cannot redefine {name}", name_tok)
        self.expect("(")
        params: list[fol.Var] = []
        while not self.at(")"):
            if params:
                self.expect(",")
            p = self.ident("parameter name").text
            sort = Sort.TXN
            if self.at(":"):
                self.i += 1
                sort = self.sort()
            params.append(fol.Var(p, sort))
        self.expect(")")
        self.expect("=")
        if params:
            body = self.formula({p.name: p for p in params})
            self.formula_macros[name] = (params, body)
        else:
            self.rel_macros[name] = self.rexpr()
        if not self.at("}"):
            self.expect(";")

    def sort(self) -> Sort:
        tok = self.ident("sort")
        if tok.text not in SORTS:
            self.fail(f"unknown sort {tok.text} (expected Txn, Obj or Val)", tok)
        return SORTS[tok.text]

    # formulas
    def formula(self, env: dict):
        if self.at("forall") or self.at("exists"):
            return self.quantified(env)
        left = self.disjunction(env)
        if self.at("=>"):
            self.i += 1
            return fol.Implies(left, self.formula(env))
        return left

    def quantified(self, env: dict):
        kind = fol.Forall if self.tok.text == "forall" else fol.Exists
        self.i += 1
        binders = []
        inner = dict(env)
        while True:
            tok = self.ident("variable name")
            if tok.text in KEYWORDS:
                self.fail(f"keyword {tok.text} used as a variable", tok)
            self.expect(":")
            var = fol.Var(tok.text, self.sort())
            if var.name in inner:
                self.error(f"variable {var.name} shadows an enclosing binder", tok)
            inner[var.name] = var
            binders.append(var)
            if not self.at(","):
                break
            self.i += 1
        self.expect(".")
        body = self.formula(inner)
        for var in reversed(binders):
            body = kind(var, body)
        return body

    def disjunction(self, env):
        parts = [self.conjunction(env)]
        while self.at("||"):
            self.i += 1
            parts.append(self.conjunction(env))
        return parts[0] if len(parts) == 1 else fol.Or(tuple(parts))

    def conjunction(self, env):
        parts = [self.unary(env)]
        while self.at("&&"):
            self.i += 1
            parts.append(self.unary(env))
        return parts[0] if len(parts) == 1 else fol.And(tuple(parts))

    def unary(self, env):
        if self.at("!"):
            self.i += 1
            return fol.Not(self.unary(env))
        if self.at("forall") or self.at("exists"):
            return self.quantified(env)
        return self.primary(env)

    def primary(self, env):
        tok = self.tok
        if self.at("("):
            save, ndiag = self.i, len(self.diags)
            try:
                expr = self.rexpr()
                if self.at("("):
                    return self.apply(expr, tok, env)
            except _Abort:
                pass
            self.i, self.diags[ndiag:] = save, []
            self.expect("(")
            f = self.formula(env)
            self.expect(")")
            return f
        if tok.kind != "ident":
            self.fail(f"expected a formula, found {tok.text or 'end of file'!r}")
        name = tok.text
        if name == "wr" and self.peek().text == "[":
            self.i += 2
            x = self.term(env)
            self.expect("]")
            a, b = self.args(env, 2, "wr[x]")
            self.check_sorts(tok, "wr[x]", [x, a, b], [Sort.OBJ, Sort.TXN, Sort.TXN])
            return wr_x(x, a, b)
        if name == "writesx":
            self.i += 1
            t, x = self.args(env, 2, name)
            self.check_sorts(tok, name, [t, x], [Sort.TXN, Sort.OBJ])
            return writes_x(t, x)
        if name in self.formula_macros:
            self.i += 1
            params, body = self.formula_macros[name]
            args = self.args(env, len(params), name)
            self.check_sorts(tok, name, args, [p.sort for p in params])
            return _instantiate(body, params, args, self.counter)
        if self.is_relation(name):
            expr = self.rexpr()
            return self.apply(expr, tok, env)
        if self.peek().text == "(" and name not in env:
            self.fail(f"unknown relation {name}", tok)
        left = self.term(env)
        if self.at("=") or self.at("!="):
            op = self.tok.text
            self.i += 1
            right = self.term(env)
            if left.sort != right.sort:
                self.error(f"cannot compare {left} ({left.sort.value}) with {right} ({right.sort.value})", tok)
            eq = fol.Eq(left, right)
            return eq if op == "=" else fol.Not(eq)
        self.fail(f"expected '=' or '!=' after term {name}")

    def is_relation(self, name: str) -> bool:
        return name in self.symbols or name in self.rel_macros or name == "wr"

    def apply(self, expr, tok: _Tok, env):
        if isinstance(expr, fol.Rel) and not expr.symbol.is_binary_txn:
            sym = expr.symbol
            args = self.args(env, sym.arity, sym.name)
            self.check_sorts(tok, sym.name, args, list(sym.sorts))
            return fol.Atom(sym, tuple(args))
        a, b = self.args(env, 2, str(expr))
        self.check_sorts(tok, str(expr), [a, b], [Sort.TXN, Sort.TXN])
        if isinstance(expr, fol.Rel):
            return fol.Atom(expr.symbol, (a, b))
        return fol.RelAtom(expr, a, b)

    def check_sorts(self, tok: _Tok, name: str, args, sorts):
        for i, (a, s) in enumerate(zip(args, sorts), start=1):
            if a.sort != s:
                self.error(f"sort mismatch at argument {i} of {name}: {a} is {a.sort.value}, expected {s.value}", tok)

    def args(self, env, n: int, name: str) -> list:
        tok = self.expect("(")
        out = []
        while not self.at(")"):
            if out:
                self.expect(",")
            out.append(self.term(env))
        self.expect(")")
        if len(out) != n:
            self.fail(f"{name} expects {n} arguments, got {len(out)}", tok)
        return out

    def term(self, env):
        tok = self.ident("term")
        if tok.text in env:
            return env[tok.text]
        try:
            return fol.const(tok.text)
        except ValueError:
            self.fail(f"unbound variable {tok.text}", tok)

    # relation expressions
    def rexpr(self):
        left = self.rjoin()
        while self.at("|"):
            self.i += 1
            left = fol.Union_(left, self.rjoin())
        return left

    def rjoin(self):
        left = self.rpost()
        while self.at(";") and self.peek().text not in KEYWORDS | {"}"} and self.peek().kind != "eof":
            self.i += 1
            left = fol.Join(left, self.rpost())
        return left

    def rpost(self):
        e = self.rprim()
        while self.at("+"):
            self.i += 1
            e = e if isinstance(e, fol.Closure) else fol.Closure(e)
        return e

    def rprim(self):
        if self.at("("):
            self.i += 1
            e = self.rexpr()
            self.expect(")")
            return e
        tok = self.ident("relation")
        if tok.text == "wr":
            return fol.WR
        if tok.text in self.rel_macros:
            return self.rel_macros[tok.text]
        sym = self.symbols.get(tok.text)
        if sym is None:
            self.fail(f"unknown relation {tok.text}", tok)
        if not sym.is_binary_txn and (self.at("|") or self.at(";") or self.at("+")):
            self.fail(f"{sym.name} is not a binary Txn relation", tok)
        return fol.Rel(sym)


def parse_level_file(text: str) -> list[LevelSpec]:
    """Parse every ``level`` block; raise LevelParseError with all diagnostics."""
    return _Parser(text).parse_file()
