"""Command-line front end: synth, check, compare, levels and bench."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench as benchmod
from .bounds import HistoryFormatError, Scope, history_from_json, history_to_json
from .dsl import LevelParseError, parse_level_file
from .levels import catalog_by_name
from .prop import SolverError, make_backend
from .synth import (
    Status,
    SynthOptions,
    SynthProblem,
    Verdict,
    check_membership,
    equivalent,
    synth,
)

EXIT_OK, EXIT_USAGE, EXIT_TIMEOUT, EXIT_SOLVER = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _catalog(spec_files):
    extra = []
    for path in spec_files or ():
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise UsageError(f"cannot read {path}: {e.strerror}") from None
        try:
            extra.extend(parse_level_file(text))
        except LevelParseError as e:
            raise UsageError("\n".join(f"{path}:{d}" for d in e.diagnostics)) from None
    return catalog_by_name(extra)


def _level(catalog, name):
    if name not in catalog:
        raise UsageError(f"unknown level {name}")
    return catalog[name]


def _scope(args, required=True):
    values = (args.txns, args.objs, args.vals)
    if None in values:
        if required:
            raise UsageError("--txns, --objs and --vals are required")
        return None
    try:
        return Scope(*values)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _pairs(rel) -> list[list[str]]:
    return [[f"t{a}", f"t{b}"] for a, b in sorted(rel)]


def _witness_json(witness) -> dict:
    return {name: _pairs(rel) for name, rel in sorted((witness or {}).items())}


def _stats_json(stats) -> dict:
    return {"candidates": stats.candidates, "initial_clauses": stats.initial_clauses,
            "solver_calls": stats.solver_calls, "wall_ms": int(round(stats.wall_time * 1000))}


def _options(args) -> SynthOptions:
    return SynthOptions(learning=not args.no_learning, smart_search=not args.no_smart_search,
                        fixed_order=not args.no_fixed_co, timeout=args.timeout, seed=args.seed)


def cmd_synth(args, out) -> int:
    catalog = _catalog(args.spec)
    allowed, disallowed = _level(catalog, args.allowed), _level(catalog, args.disallowed)
    try:
        problem = SynthProblem(allowed, disallowed, _scope(args), _options(args))
    except ValueError as e:
        raise UsageError(str(e)) from None
    outcome = synth(problem, backend=args.backend, dimacs_dir=args.dimacs_dir)
    doc = {"allowed": allowed.name, "disallowed": disallowed.name, "result": outcome.status.value,
           "stats": _stats_json(outcome.stats)}
    if outcome.sat:
        doc["history"] = history_to_json(outcome.history, outcome.history.transactions())
        doc["witness"] = _witness_json(outcome.witness)
    if args.format == "json":
        print(json.dumps(doc, indent=2), file=out)
    else:
        print(f"result: {doc['result']}", file=out)
        if outcome.sat:
            print(outcome.history.describe(), file=out)
            for name, pairs in doc["witness"].items():
                print(f"{name}: " + " ".join(f"{a}<{b}" for a, b in pairs), file=out)
            print("history: " + json.dumps(doc["history"]), file=out)
        s = doc["stats"]
        print(f"candidates: {s['candidates']}  initial_clauses: {s['initial_clauses']}  "
              f"solver_calls: {s['solver_calls']}  wall_ms: {s['wall_ms']}", file=out)
    if outcome.status is Status.TIMEOUT:
        return EXIT_TIMEOUT
    if args.fail_on_unsat and outcome.status is Status.UNSAT:
        return 1
    return EXIT_OK


def cmd_check(args, out) -> int:
    catalog = _catalog(args.spec)
    level = _level(catalog, args.level)
    scope = _scope(args, required=False)
    try:
        text = Path(args.history).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {args.history}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed history: invalid JSON: {e}") from None
    if isinstance(doc, dict) and "transactions" not in doc and isinstance(doc.get("history"), dict):
        doc = doc["history"]  # a `synth --format json` document
    try:
        history = history_from_json(doc, scope)
        result = check_membership(level, history, scope, backend=args.backend)
    except ValueError as e:  # HistoryFormatError included
        raise UsageError(f"malformed history: {e}") from None
    verdict = "allowed" if result.allowed else "disallowed"
    if args.format == "json":
        doc = {"level": level.name, "verdict": verdict}
        if result.allowed:
            doc["witness"] = _witness_json(result.witness)
        print(json.dumps(doc, indent=2), file=out)
    else:
        print(f"{level.name}: {verdict}", file=out)
        for name, pairs in _witness_json(result.witness).items():
            print(f"{name}: " + " ".join(f"{a}<{b}" for a, b in pairs), file=out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    catalog = _catalog(args.spec)
    a, b = _level(catalog, args.a), _level(catalog, args.b)
    opts = SynthOptions(timeout=args.timeout, seed=args.seed)
    try:
        eq = equivalent(a, b, _scope(args), opts, backend=args.backend)
    except ValueError as e:
        raise UsageError(str(e)) from None
    directions = [(a, b, eq.forward), (b, a, eq.backward)]
    if args.format == "json":
        doc = {"a": a.name, "b": b.name,
               "equivalent": eq.equivalent,
               "directions": []}
        for x, y, r in directions:
            entry = {"allowed": x.name, "disallowed": y.name, "verdict": r.verdict.value}
            if r.history is not None:
                entry["history"] = history_to_json(r.history, r.history.transactions())
            doc["directions"].append(entry)
        print(json.dumps(doc, indent=2), file=out)
    else:
        for x, y, r in directions:
            print(f"{x.name} refines {y.name}: {r.verdict.value}", file=out)
            if r.history is not None:
                print("  witness: " + json.dumps(history_to_json(r.history, r.history.transactions())), file=out)
        summary = {True: "equivalent within scope", False: "not equivalent", None: "indeterminate"}
        print(summary[eq.equivalent], file=out)
    if eq.equivalent is None:
        return EXIT_TIMEOUT
    return EXIT_OK


def cmd_levels(args, out) -> int:
    catalog = _catalog(args.spec)
    for name, level in catalog.items():
        print(f"{name}\t{level.framework.name}", file=out)
    return EXIT_OK


def cmd_bench(args, out) -> int:
    catalog = _catalog(args.spec)
    if args.suite:
        try:
            problems = benchmod.load_suite(args.suite, catalog)
        except benchmod.SuiteError as e:
            raise UsageError(f"malformed suite: {e}") from None
    else:
        problems = benchmod.default_suite(range(2, args.max_txns + 1), timeout=args.timeout)

    def progress(row):
        print(f"{row.problem_id} {row.variant} {row.result} {row.wall_ms}ms", file=sys.stderr)

    rows = benchmod.run_bench(problems, args.output, workers=args.workers, seed=args.seed, solver=args.solver,
                              progress=progress if args.verbose else None)
    print(f"wrote {len(rows)} rows to {args.output}", file=out)
    return EXIT_OK


def _add_scope(p, required):
    p.add_argument("--txns", type=int, required=required)
    p.add_argument("--objs", type=int, required=required)
    p.add_argument("--vals", type=int, required=required)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isosynth", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--solver", choices=("auto", "cadical", "cdcl", "external"), default="auto",
                        help="SAT backend (auto: $ISOLDE_SAT_CMD, else cadical if installed, else cdcl)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="find a history allowed by one level and not another")
    p.add_argument("--allowed", required=True)
    p.add_argument("--disallowed", required=True)
    _add_scope(p, True)
    p.add_argument("--spec", action="append", default=[], metavar="FILE", help="extra level definitions")
    p.add_argument("--no-learning", action="store_true")
    p.add_argument("--no-smart-search", action="store_true")
    p.add_argument("--no-fixed-co", action="store_true")
    p.add_argument("--timeout", type=float, default=None, metavar="SECS")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--dimacs-dir", default=None, metavar="DIR")
    p.add_argument("--fail-on-unsat", action="store_true", help="exit 1 when no history exists")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", help="is a history allowed by a level")
    p.add_argument("--level", required=True)
    p.add_argument("--history", required=True, metavar="FILE")
    _add_scope(p, False)
    p.add_argument("--spec", action="append", default=[], metavar="FILE")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("compare", help="check refinement in both directions")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _add_scope(p, True)
    p.add_argument("--spec", action="append", default=[], metavar="FILE")
    p.add_argument("--timeout", type=float, default=None, metavar="SECS")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("levels", help="level catalog")
    p.add_argument("action", choices=("list",))
    p.add_argument("--spec", action="append", default=[], metavar="FILE")
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    p.add_argument("--suite", default=None, metavar="FILE", help="JSON suite; default is the built-in grid")
    p.add_argument("--output", "-o", default="bench.csv")
    p.add_argument("--max-txns", type=int, default=7, help="largest txns in the default suite")
    p.add_argument("--timeout", type=float, default=benchmod.DEFAULT_TIMEOUT, metavar="SECS")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spec", action="append", default=[], metavar="FILE")
    p.set_defaults(func=cmd_bench)
    return parser


def run_cli(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.backend = make_backend(args.solver, getattr(args, "seed", 0))
    except SolverError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
