"""Bounded synthesis of histories that separate two transaction isolation levels."""
from .bounds import History, Scope, history_from_json, history_to_json
from .dsl import LevelParseError, parse_level_file
from .levels import LevelSpec, builtin_catalog, catalog_by_name
from .synth import (
    Status,
    SynthOptions,
    SynthOutcome,
    SynthProblem,
    Verdict,
    check_membership,
    equivalent,
    refines,
    synth,
)

__all__ = [
    "History", "Scope", "history_from_json", "history_to_json",
    "LevelParseError", "parse_level_file",
    "LevelSpec", "builtin_catalog", "catalog_by_name",
    "Status", "SynthOptions", "SynthOutcome", "SynthProblem", "Verdict",
    "check_membership", "equivalent", "refines", "synth",
]
