"""A compact CDCL SAT solver.

Two watched literals, first-UIP clause learning, VSIDS-style variable
activities, phase saving and Luby restarts. Literals are encoded internally as
``2*var + sign`` so that negation is ``code ^ 1``.
"""
from __future__ import annotations

import heapq
import random
import time
from typing import Iterable, Sequence


class SolverTimeout(Exception):
    """The solver hit its deadline before reaching a verdict."""


def _luby(i: int) -> int:
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


class Solver:
    restart_base = 100
    var_decay = 1 / 0.95

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]], seed: int = 0):
        self.n = num_vars
        size = 2 * num_vars + 2
        self.value: list = [None] * size  # per literal code
        self.level = [0] * (num_vars + 1)
        self.reason: list = [None] * (num_vars + 1)
        self.watches: list[list] = [[] for _ in range(size)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.polarity = [1] * (num_vars + 1)  # 1 -> try the negative literal first
        rng = random.Random(seed)
        # Tiny seeded jitter fixes the initial decision order deterministically.
        self.activity = [rng.random() * 1e-5 for _ in range(num_vars + 1)]
        self.var_inc = 1.0
        self.heap = [(-self.activity[v], v) for v in range(1, num_vars + 1)]
        heapq.heapify(self.heap)
        # in_heap[v]: the heap holds an entry for v carrying its current activity
        self.in_heap = [False] + [True] * num_vars
        self.conflicts = 0
        self.ok = True
        self.units: list[int] = []
        for clause in clauses:
            self._add_input(clause)

    @staticmethod
    def _code(lit: int) -> int:
        return (lit << 1) if lit > 0 else ((-lit) << 1) | 1

    def _add_input(self, clause: Sequence[int]) -> None:
        lits = set()
        for lit in clause:
            if lit == 0 or abs(lit) > self.n:
                raise ValueError(f"literal {lit} out of range 1..{self.n}")
            code = self._code(lit)
            if code ^ 1 in lits:
                return  # tautology
            lits.add(code)
        if not lits:
            self.ok = False
            return
        c = sorted(lits)
        if len(c) == 1:
            self.units.append(c[0])
            return
        self.watches[c[0]].append(c)
        self.watches[c[1]].append(c)

    def _enqueue(self, code: int, reason) -> None:
        v = code >> 1
        self.value[code] = True
        self.value[code ^ 1] = False
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(code)

    def _propagate(self):
        value, watches, trail = self.value, self.watches, self.trail
        while self.qhead < len(trail):
            p = trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], false_lit
                first = c[0]
                if value[first] is True:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if value[c[k]] is not False:
                        c[1], c[k] = c[k], false_lit
                        watches[c[1]].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if value[first] is False:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        return c
                    self._enqueue(first, c)
            del ws[j:]
        return None

    def _bump(self, v: int) -> None:
        act = self.activity
        act[v] += self.var_inc
        if act[v] > 1e100:
            for u in range(1, self.n + 1):
                act[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-act[u], u) for u in range(1, self.n + 1) if self.value[u << 1] is None]
            heapq.heapify(self.heap)
            self.in_heap = [False] * (self.n + 1)
            for _, u in self.heap:
                self.in_heap[u] = True
        elif self.in_heap[v]:
            heapq.heappush(self.heap, (-act[v], v))

    def _analyze(self, confl):
        seen = self._seen
        level = self.level
        current = len(self.trail_lim)
        learnt = [0]
        path = 0
        p = None
        idx = len(self.trail) - 1
        c = confl
        while True:
            for q in (c if p is None else c[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if level[v] >= current:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = p >> 1
            c = self.reason[v]
            seen[v] = False
            path -= 1
            if path == 0:
                break
        learnt[0] = p ^ 1
        for q in learnt[1:]:
            seen[q >> 1] = False
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: level[learnt[k] >> 1])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, level[learnt[1] >> 1]

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        value, heap, act, pol, in_heap = self.value, self.heap, self.activity, self.polarity, self.in_heap
        reason = self.reason
        start = self.trail_lim[lvl]
        for code in self.trail[start:]:
            v = code >> 1
            value[code] = None
            value[code ^ 1] = None
            reason[v] = None
            pol[v] = code & 1
            if not in_heap[v]:
                in_heap[v] = True
                heapq.heappush(heap, (-act[v], v))
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self):
        heap, value, act, in_heap = self.heap, self.value, self.activity, self.in_heap
        while heap:
            a, v = heapq.heappop(heap)
            if -a != act[v]:
                continue  # stale entry; a fresher one exists
            in_heap[v] = False
            if value[v << 1] is None:
                return v
        for v in range(1, self.n + 1):
            if value[v << 1] is None:
                return v
        return None

    def solve(self, deadline: float | None = None) -> list[bool] | None:
        """Return a model indexed by variable (index 0 unused), or None if UNSAT."""
        if not self.ok:
            return None
        self._seen = [False] * (self.n + 1)
        for code in self.units:
            if self.value[code] is False:
                return None
            if self.value[code] is None:
                self._enqueue(code, None)
        if self._propagate() is not None:
            return None
        restart_no = 1
        budget = _luby(restart_no) * self.restart_base
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    return None
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    self.watches[learnt[0]].append(learnt)
                    self.watches[learnt[1]].append(learnt)
                    self._enqueue(learnt[0], learnt)
                self.var_inc *= self.var_decay
                budget -= 1
                if deadline is not None and self.conflicts % 128 == 0 and time.monotonic() > deadline:
                    raise SolverTimeout()
                continue
            if budget <= 0:
                restart_no += 1
                budget = _luby(restart_no) * self.restart_base
                self._cancel_until(0)
                continue
            v = self._pick()
            if v is None:
                return [False] + [self.value[u << 1] is True for u in range(1, self.n + 1)]
            self.trail_lim.append(len(self.trail))
            self._enqueue((v << 1) | self.polarity[v], None)


def solve_clauses(num_vars: int, clauses: Iterable[Sequence[int]], seed: int = 0,
                  deadline: float | None = None) -> list[bool] | None:
    return Solver(num_vars, clauses, seed).solve(deadline)
