"""Benchmark harness: run synthesis problems under option variants and emit CSV rows."""
from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable, Mapping

from .bounds import Scope
from .levels import LevelSpec, builtin_catalog
from .prop import make_backend
from .synth import Status, SynthOptions, SynthProblem, synth

VARIANTS = {
    "full": {},
    "no_learning": {"learning": False},
    "no_smart_search": {"smart_search": False},
    "no_fixed_co": {"fixed_order": False},
}
DEFAULT_TIMEOUT = 60.0


class SuiteError(ValueError):
    pass


@dataclass(frozen=True)
class BenchRow:
    problem_id: str
    problem_type: str
    txns: int
    objs: int
    vals: int
    variant: str
    result: str
    wall_ms: int
    candidates: int
    initial_clauses: int
    solver_calls: int


HEADER = [f.name for f in fields(BenchRow)]


@dataclass(frozen=True)
class BenchProblem:
    id: str
    allowed: LevelSpec
    disallowed: LevelSpec
    scope: Scope
    variants: tuple[str, ...] = tuple(VARIANTS)
    timeout: float = DEFAULT_TIMEOUT

    @property
    def single_framework(self) -> bool:
        return self.allowed.framework.name == self.disallowed.framework.name


def default_suite(txns: Iterable[int] = range(2, 8), objs: int = 2, vals: int = 3,
                  levels: list[LevelSpec] | None = None, timeout: float = DEFAULT_TIMEOUT) -> list[BenchProblem]:
    """Every ordered pair of distinct levels at each transaction bound."""
    levels = levels if levels is not None else builtin_catalog()
    out = []
    for a in levels:
        for b in levels:
            if a is b:
                continue
            for t in txns:
                out.append(BenchProblem(f"{a.name}-{b.name}-t{t}", a, b, Scope(t, objs, vals), timeout=timeout))
    return out


def _scope(value) -> Scope:
    try:
        if isinstance(value, Mapping):
            return Scope(int(value["txns"]), int(value["objs"]), int(value["vals"]))
        t, o, v = value
        return Scope(int(t), int(o), int(v))
    except (KeyError, TypeError, ValueError) as e:
        raise SuiteError(f"bad scope {value!r}: {e}") from None


def load_suite(doc, catalog: Mapping[str, LevelSpec]) -> list[BenchProblem]:
    """Parse a suite: a JSON list of problems, or an object with a "problems" list."""
    if isinstance(doc, (str, Path)):
        try:
            doc = json.loads(Path(doc).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise SuiteError(f"cannot read suite: {e}") from None
    if isinstance(doc, Mapping):
        doc = doc.get("problems")
    if not isinstance(doc, list):
        raise SuiteError('suite must be a list of problems or an object with a "problems" list')
    problems, ids = [], set()
    for i, entry in enumerate(doc):
        if not isinstance(entry, Mapping):
            raise SuiteError(f"problem {i} is not an object")
        missing = {"id", "allowed", "disallowed", "scope"} - set(entry)
        if missing:
            raise SuiteError(f"problem {i} lacks {sorted(missing)}")
        pid = str(entry["id"])
        if pid in ids:
            raise SuiteError(f"duplicate problem id {pid}")
        ids.add(pid)
        for key in ("allowed", "disallowed"):
            if entry[key] not in catalog:
                raise SuiteError(f"unknown level {entry[key]}")
        variants = tuple(entry.get("variants", VARIANTS))
        bad = [v for v in variants if v not in VARIANTS]
        if bad or not variants:
            raise SuiteError(f"problem {pid}: unknown variants {bad}")
        try:
            timeout = float(entry.get("timeout", DEFAULT_TIMEOUT))
        except (TypeError, ValueError):
            raise SuiteError(f"problem {pid}: bad timeout {entry.get('timeout')!r}") from None
        problems.append(BenchProblem(pid, catalog[entry["allowed"]], catalog[entry["disallowed"]],
                                     _scope(entry["scope"]), variants, timeout))
    return problems


def run_one(problem: BenchProblem, variant: str, seed: int = 0, solver: str = "auto") -> tuple[str, int, object]:
    opts = SynthOptions(timeout=problem.timeout, seed=seed, **VARIANTS[variant])
    start = time.monotonic()
    out = synth(SynthProblem(problem.allowed, problem.disallowed, problem.scope, opts),
                backend=make_backend(solver, seed))
    wall_ms = int(round((time.monotonic() - start) * 1000))
    return out.status.value, wall_ms, out.stats


def _row(problem: BenchProblem, variant: str, result: str, wall_ms: int, stats, verdict: str | None) -> BenchRow:
    kind = "single" if problem.single_framework else "multi"
    # A timed-out row takes the verdict of a finished variant, else the unsat label.
    label = result if result != Status.TIMEOUT.value else (verdict or Status.UNSAT.value)
    s = problem.scope
    return BenchRow(problem.id, f"{kind}_{label}", s.txn, s.obj, s.val, variant, result, wall_ms,
                    stats.candidates, stats.initial_clauses, stats.solver_calls)


class CsvSink:
    """Single writer; every row is flushed and synced before the next one."""

    def __init__(self, path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.fh = open(self.path, "w", newline="")
        self.writer = csv.writer(self.fh)
        self._emit(HEADER)

    def _emit(self, values):
        self.writer.writerow(values)
        self.fh.flush()
        os.fsync(self.fh.fileno())

    def write(self, row: BenchRow):
        self._emit([getattr(row, name) for name in HEADER])

    def close(self):
        self.fh.close()


def run_bench(problems: list[BenchProblem], output, workers: int = 1, seed: int = 0,
              solver: str = "auto", progress=None) -> list[BenchRow]:
    """Run every (problem, variant) and write rows to ``output`` as they finish."""
    tasks = [(p, v) for p in problems for v in p.variants]
    verdicts: dict[str, str] = {}
    rows: list[BenchRow] = []
    sink = CsvSink(output)

    def record(problem, variant, result, wall_ms, stats):
        if result != Status.TIMEOUT.value:
            verdicts.setdefault(problem.id, result)
        row = _row(problem, variant, result, wall_ms, stats, verdicts.get(problem.id))
        sink.write(row)
        rows.append(row)
        if progress:
            progress(row)

    try:
        if workers <= 1:
            for problem, variant in tasks:
                record(problem, variant, *run_one(problem, variant, seed, solver))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_one, p, v, seed, solver) for p, v in tasks]
                for (problem, variant), fut in zip(tasks, futures):
                    record(problem, variant, *fut.result())
    finally:
        sink.close()
    return rows


def read_rows(path) -> list[BenchRow]:
    """Strict reader: the header must match and every field must convert."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        out = []
        for line in reader:
            if len(line) != len(HEADER):
                raise ValueError(f"malformed row {line}")
            values = dict(zip(HEADER, line))
            for f in fields(BenchRow):
                if f.type == "int":
                    values[f.name] = int(values[f.name])
            out.append(BenchRow(**values))
    return out


def family_key(row: BenchRow) -> tuple[str, str, int, int]:
    """Problems that differ only in the transaction bound form one family."""
    base = row.problem_id.rsplit("-t", 1)[0]
    return base, row.variant, row.objs, row.vals


def scaling_report(rows: Iterable[BenchRow]) -> list[dict]:
    """Per family: series over txns and whether time and clauses never decrease."""
    families: dict[tuple, list[BenchRow]] = {}
    for row in rows:
        families.setdefault(family_key(row), []).append(row)
    report = []
    for key, members in sorted(families.items()):
        members.sort(key=lambda r: r.txns)
        clauses = [r.initial_clauses for r in members]
        times = [r.wall_ms for r in members]
        report.append({
            "family": key[0], "variant": key[1],
            "txns": [r.txns for r in members],
            "initial_clauses": clauses, "wall_ms": times,
            "results": [r.result for r in members],
            "clauses_monotone": all(a <= b for a, b in zip(clauses, clauses[1:])),
            "time_monotone": all(a <= b for a, b in zip(times, times[1:])),
        })
    return report


def rows_as_dicts(rows: Iterable[BenchRow]) -> list[dict]:
    return [asdict(r) for r in rows]
