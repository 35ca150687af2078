"""Scan rules: the valuable-function database, thresholds, severity table.

One JSON document configures the whole scan (`--rules`). Patterns are
anchored regexes matched with fullmatch against dotted member paths.
Unknown keys anywhere in the document are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

CRYPTO_ROLES = ("derive_key", "decrypt", "encrypt", "hash")
SINK_KINDS = ("html_write", "navigation")
SEVERITIES = ("low", "medium", "high", "critical")


class RulesError(Exception):
    pass


@dataclass
class CryptoPattern:
    pattern: str
    role: str
    param_schema: list[str] = field(default_factory=list)
    option_keys: list[str] = field(default_factory=list)
    regex: re.Pattern = field(init=False, repr=False)

    def __post_init__(self):
        self.regex = re.compile(self.pattern)


@dataclass
class SinkPattern:
    pattern: str
    sink_kind: str
    via: str = "call"          # "call" or "assign"
    taint_arg: int = 0         # argument position carrying the payload
    regex: re.Pattern = field(init=False, repr=False)

    def __post_init__(self):
        self.regex = re.compile(self.pattern)


@dataclass
class SourcePattern:
    pattern: str
    externally_modifiable: bool
    regex: re.Pattern = field(init=False, repr=False)

    def __post_init__(self):
        self.regex = re.compile(self.pattern)


@dataclass
class ValuableFunctionDb:
    crypto: list[CryptoPattern]
    dom_sinks: list[SinkPattern]
    dom_sources: list[SourcePattern]


@dataclass
class Thresholds:
    pbkdf2_min_iterations: int = 10000
    pbkdf2_strong_iterations: int = 310000
    password_max_digits_len: int = 6
    password_min_len: int = 6
    min_needle_len: int = 4


@dataclass
class Rules:
    db: ValuableFunctionDb
    thresholds: Thresholds
    severities: dict[str, str]


def _check_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise RulesError(f"unknown keys in {where}: {sorted(unknown)}")


def load_rules(raw: str) -> Rules:
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise RulesError(f"rules file is not valid JSON: {exc}") from exc
    _check_keys(data, {"version", "valuable_functions", "thresholds",
                       "severities", "notes"}, "rules document")
    vf = data.get("valuable_functions", {})
    _check_keys(vf, {"crypto", "dom_sinks", "dom_sources"}, "valuable_functions")

    crypto = []
    for item in vf.get("crypto", []):
        _check_keys(item, {"pattern", "role", "param_schema", "option_keys",
                           "notes"}, "crypto pattern")
        if item.get("role") not in CRYPTO_ROLES:
            raise RulesError(f"bad crypto role {item.get('role')!r}")
        try:
            crypto.append(CryptoPattern(
                pattern=item["pattern"], role=item["role"],
                param_schema=item.get("param_schema", []),
                option_keys=item.get("option_keys", [])))
        except re.error as exc:
            raise RulesError(f"bad regex {item.get('pattern')!r}: {exc}") from exc

    sinks = []
    for item in vf.get("dom_sinks", []):
        _check_keys(item, {"pattern", "sink_kind", "via", "taint_arg", "notes"},
                    "dom sink")
        if item.get("sink_kind") not in SINK_KINDS:
            raise RulesError(f"bad sink_kind {item.get('sink_kind')!r}")
        if item.get("via", "call") not in ("call", "assign"):
            raise RulesError(f"bad sink via {item.get('via')!r}")
        try:
            sinks.append(SinkPattern(
                pattern=item["pattern"], sink_kind=item["sink_kind"],
                via=item.get("via", "call"),
                taint_arg=int(item.get("taint_arg", 0))))
        except re.error as exc:
            raise RulesError(f"bad regex {item.get('pattern')!r}: {exc}") from exc

    sources = []
    for item in vf.get("dom_sources", []):
        _check_keys(item, {"pattern", "externally_modifiable", "notes"},
                    "dom source")
        try:
            sources.append(SourcePattern(
                pattern=item["pattern"],
                externally_modifiable=bool(item.get("externally_modifiable"))))
        except re.error as exc:
            raise RulesError(f"bad regex {item.get('pattern')!r}: {exc}") from exc

    thr_data = data.get("thresholds", {})
    _check_keys(thr_data, {f.name for f in
                           Thresholds.__dataclass_fields__.values()} | {"notes"},
                "thresholds")
    thresholds = Thresholds(**{k: v for k, v in thr_data.items() if k != "notes"})

    severities = dict(data.get("severities", {}))
    for key, value in severities.items():
        if value not in SEVERITIES:
            raise RulesError(f"bad severity {value!r} for {key!r}")

    return Rules(db=ValuableFunctionDb(crypto=crypto, dom_sinks=sinks,
                                       dom_sources=sources),
                 thresholds=thresholds, severities=severities)


_DEFAULT_RULES_PATH = Path(__file__).parent / "data" / "rules.json"


def default_rules() -> Rules:
    return load_rules(_DEFAULT_RULES_PATH.read_text(encoding="utf-8"))
