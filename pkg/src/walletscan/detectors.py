"""The six rule-based vulnerability detectors.

Each detector is a pure function of immutable inputs (static artifacts,
a runtime trace, or both) returning Finding records with re-checkable
evidence. Non-finding observations (indeterminate iteration counts,
unresolved cross-file traces, strong-crypto confirmations) go to the
caller's notes list instead of the findings.
"""

from __future__ import annotations

import base64
import fnmatch
import hashlib
import json
import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path

from .analysis import FunctionMatch, TaintTrace
from .loader import Manifest
from .rules import Rules
from .semantics import PageClassification, tokenize
from .trace import PasswordProbeResult, RuntimeEvent, RuntimeTrace

CATEGORIES = ("clickjacking", "xss", "defective_password_policy",
              "redundant_storage", "demonic", "defective_cryptography")

SEVERITY_RANK = {"critical": 0, "high": 1, "medium": 2, "low": 3}

NORMALIZATIONS = ("raw", "hex", "base64", "json_embedded", "utf16")

_HEX64_RE = re.compile(r"\b[0-9a-fA-F]{64}\b")


@dataclass
class EvidenceRef:
    kind: str                   # file_span | manifest_key | event | match
    detail: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.detail}


@dataclass
class MatchEvidence:
    needle: str
    normalization: str
    haystack_location: str = ""
    haystack_excerpt: str = ""

    def recheck(self) -> bool:
        return _encode(self.needle, self.normalization) in self.haystack_excerpt


@dataclass
class Finding:
    category: str
    severity: str
    description: str
    remediation: str
    evidence: list[EvidenceRef] = field(default_factory=list)

    def sort_key(self) -> tuple:
        first = self.evidence[0].detail if self.evidence else {}
        return (SEVERITY_RANK.get(self.severity, 9), self.category,
                str(first.get("file", "")), json.dumps(first, sort_keys=True))

    def to_json(self) -> dict:
        return {
            "category": self.category,
            "severity": self.severity,
            "description": self.description,
            "remediation": self.remediation,
            "evidence": [e.to_json() for e in self.evidence],
        }


# ------------------------------------------------------- sensitive match

def _encode(needle: str, normalization: str) -> str:
    if normalization == "raw":
        return needle
    if normalization == "hex":
        return needle.encode("utf-8").hex()
    if normalization == "base64":
        return base64.b64encode(needle.encode("utf-8")).decode("ascii")
    if normalization == "json_embedded":
        return json.dumps(needle, ensure_ascii=False)[1:-1]
    if normalization == "utf16":
        return needle.encode("utf-16-le").decode("latin-1")
    raise ValueError(f"unknown normalization {normalization!r}")


def sensitive_match(needle: str, haystack_entry: str,
                    min_len: int = 4) -> MatchEvidence | None:
    """First normalization under which the needle occurs in the entry.

    Normalizations are tried in the fixed order raw, hex, base64,
    json_embedded, utf16; hex matching is case-insensitive. Needles
    shorter than min_len never match (too many accidental hits).
    """
    if len(needle) < min_len:
        return None
    for normalization in NORMALIZATIONS:
        encoded = _encode(needle, normalization)
        hay = haystack_entry
        if normalization == "hex":
            encoded, hay = encoded.lower(), haystack_entry.lower()
        pos = hay.find(encoded)
        if pos == -1:
            continue
        lo = max(0, pos - 20)
        hi = min(len(haystack_entry), pos + len(encoded) + 20)
        return MatchEvidence(needle=needle, normalization=normalization,
                             haystack_excerpt=haystack_entry[lo:hi])
    return None


# -------------------------------------------------------- clickjacking

_SENSITIVE_PAGE_IDS = {"home", "wallet_unlock", "mnemonic_display"}


def detect_clickjacking(manifest: Manifest,
                        page_classes: dict[str, PageClassification],
                        rules: Rules) -> list[Finding]:
    """Flag every bundled HTML page exposed through web_accessible_resources.

    Pages whose offline classification is a sensitive surface (home,
    unlock, secret display) or that are the declared action page rate
    high; any other exposed HTML rates medium.
    """
    findings: list[Finding] = []
    for page in sorted(page_classes):
        exposed = any(fnmatch.fnmatchcase(page, pattern.lstrip("/"))
                      for pattern in manifest.war)
        if not exposed:
            continue
        classification = page_classes[page]
        sensitive = classification.page_id in _SENSITIVE_PAGE_IDS or \
            (manifest.action_page or "").lstrip("/") == page
        severity = rules.severities.get(
            "clickjacking_sensitive" if sensitive else "clickjacking_other",
            "high" if sensitive else "medium")
        what = classification.page_id if classification.known else "unclassified"
        findings.append(Finding(
            category="clickjacking",
            severity=severity,
            description=(f"HTML page {page!r} ({what}) is web-accessible and "
                         f"can be framed by any external site"),
            remediation=("remove HTML pages from web_accessible_resources or "
                         "strip wallet functionality from exposed pages"),
            evidence=[EvidenceRef("manifest_key", {
                "file": "manifest.json",
                "key": "web_accessible_resources",
                "resource": page,
                "classified_as": classification.page_id,
            })],
        ))
    return findings


# ----------------------------------------------------------------- xss

def _csp_restricts_scripts(csp: str | None) -> bool:
    if not csp:
        return False
    directives = {}
    for part in csp.split(";"):
        tokens = part.strip().split()
        if tokens:
            directives[tokens[0].lower()] = [t.lower() for t in tokens[1:]]
    sources = directives.get("script-src", directives.get("default-src"))
    if sources is None:
        return False
    return "'unsafe-inline'" not in sources and "*" not in sources


def detect_xss(traces: list[TaintTrace], manifest: Manifest,
               rules: Rules, notes: list[str] | None = None) -> list[Finding]:
    """One finding per externally-modifiable sink/source pair.

    Unresolved (cross-file) traces are reported as notes, not findings.
    A CSP that restricts script sources drops the severity one level.
    """
    notes = notes if notes is not None else []
    findings: list[Finding] = []
    seen: set[tuple] = set()
    restricted = _csp_restricts_scripts(manifest.csp)
    for trace in traces:
        if trace.unresolved:
            notes.append(
                f"xss: unresolved taint trace in {trace.sink.file} at node "
                f"{trace.sink.node_id} (data source outside this file)")
            continue
        if not trace.externally_modifiable:
            continue
        key = (trace.sink.file, trace.sink.node_id, trace.source)
        if key in seen:
            continue
        seen.add(key)
        severity = rules.severities.get("xss_with_csp", "medium") if restricted \
            else rules.severities.get("xss", "high")
        description = (f"{trace.sink.callee_path} receives data reaching back "
                       f"to {trace.source} which an external page controls")
        if restricted:
            description += " (CSP restricts script sources, impact reduced)"
        findings.append(Finding(
            category="xss",
            severity=severity,
            description=description,
            remediation=("sanitize or encode values before DOM insertion; "
                         "avoid rendering URL fragments directly"),
            evidence=[EvidenceRef("file_span", {
                "file": trace.sink.file,
                "span": list(trace.sink.span),
                "sink": trace.sink.callee_path,
                "source": trace.source,
                "steps": [[nid, kind] for nid, kind in trace.steps],
            })],
        ))
    return findings


# ------------------------------------------------------ password policy

def detect_password_policy(probe: PasswordProbeResult | None,
                           rules: Rules) -> list[Finding]:
    """Weak iff the weakest accepted password is <=6 chars all digits,
    or shorter than 6 of any composition."""
    if probe is None or probe.inconclusive or probe.weakest_accepted is None:
        return []
    accepted = probe.weakest_accepted
    thr = rules.thresholds
    weak = (len(accepted) <= thr.password_max_digits_len and accepted.isdigit()) \
        or len(accepted) < thr.password_min_len
    if not weak:
        return []
    return [Finding(
        category="defective_password_policy",
        severity=rules.severities.get("defective_password_policy", "medium"),
        description=(f"wallet accepted the weak password {accepted!r} "
                     f"during setup"),
        remediation=("require at least 8 characters mixing letters and "
                     "digits before accepting a wallet password"),
        evidence=[EvidenceRef("match", {
            "attempts": [[candidate, ok] for candidate, ok in probe.attempts],
            "weakest_accepted": accepted,
        })],
    )]


# ----------------------------------------------------- redundant storage

def _password_hash_needles(password: str) -> list[tuple[str, str]]:
    """Initial-hash comparison candidates the wallet might have stored."""
    out = []
    for algo in ("sha256", "sha512"):
        digest = getattr(hashlib, algo)(password.encode("utf-8"))
        out.append((f"password_{algo}_hex", digest.hexdigest()))
        out.append((f"password_{algo}_b64",
                    base64.b64encode(digest.digest()).decode("ascii")))
    return out


def _storage_entries(event: RuntimeEvent):
    payload = event.payload
    for area in ("localStorage", "sessionStorage"):
        for key, value in sorted((payload.get(area) or {}).items()):
            yield f"{area}:{key}", str(value)
    for db_name, stores in sorted((payload.get("indexedDB") or {}).items()):
        if not isinstance(stores, dict):
            continue
        for store, values in sorted(stores.items()):
            if isinstance(values, list):
                for i, value in enumerate(values):
                    yield f"indexedDB:{db_name}.{store}[{i}]", str(value)
            else:
                yield f"indexedDB:{db_name}.{store}", str(values)


def detect_redundant_storage(trace: RuntimeTrace, rules: Rules) -> list[Finding]:
    """Compare the sensitive corpus against every storage entry seen.

    Needles: the typed password and mnemonic (critical on hit), the
    harness-computed initial password hashes, observed private keys, and
    captured crypto intermediates (high on hit). One finding per
    distinct (needle, location).
    """
    corpus = trace.sensitive_corpus
    needles: list[tuple[str, str, str]] = []  # (label, value, severity_key)
    if corpus.password_used:
        needles.append(("password", corpus.password_used,
                        "redundant_storage_plaintext"))
        for label, value in _password_hash_needles(corpus.password_used):
            needles.append((label, value, "redundant_storage_derived"))
    if corpus.mnemonic_words:
        needles.append(("mnemonic", corpus.mnemonic_phrase,
                        "redundant_storage_plaintext"))
    for i, key in enumerate(corpus.private_keys_observed):
        needles.append((f"private_key[{i}]", key, "redundant_storage_plaintext"))
    for i, value in enumerate(corpus.intermediate_crypto_values):
        needles.append((f"crypto_intermediate[{i}]", value,
                        "redundant_storage_derived"))

    min_len = rules.thresholds.min_needle_len
    findings: list[Finding] = []
    seen: set[tuple[str, str]] = set()
    for event in trace.of_kind("storage_snapshot"):
        for location, value in _storage_entries(event):
            for label, needle, severity_key in needles:
                if (needle, location) in seen:
                    continue
                match = sensitive_match(needle, value, min_len=min_len)
                if match is None:
                    continue
                seen.add((needle, location))
                match.haystack_location = location
                severity = rules.severities.get(
                    severity_key,
                    "critical" if severity_key.endswith("plaintext") else "high")
                findings.append(Finding(
                    category="redundant_storage",
                    severity=severity,
                    description=(f"{label} found in {location} "
                                 f"({match.normalization} form)"),
                    remediation=("never persist credentials or decryption "
                                 "intermediates; derive keys on demand and "
                                 "keep them in memory only"),
                    evidence=[EvidenceRef("event", {
                        "event_id": event.event_id,
                        "location": location,
                        "needle_label": label,
                        "normalization": match.normalization,
                        "excerpt": match.haystack_excerpt,
                    })],
                ))
    return findings


# --------------------------------------------------------------- demonic

class _TextElementParser(HTMLParser):
    """Collects (tag, input_type, text) for text-bearing elements."""

    _TEXT_TAGS = {"div", "span", "p", "td", "li", "pre", "code", "b",
                  "strong", "em", "h1", "h2", "h3", "h4", "h5", "h6",
                  "label", "section", "article"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.found: list[tuple[str, str, str]] = []
        self._stack: list[tuple[str, list[str]]] = []

    def handle_starttag(self, tag, attrs):
        amap = {k: (v or "") for k, v in attrs}
        if tag == "input":
            input_type = amap.get("type", "text").lower()
            if amap.get("value"):
                self.found.append(("input", input_type, amap["value"]))
            return
        if tag == "textarea" or tag in self._TEXT_TAGS:
            self._stack.append((tag, []))

    def handle_endtag(self, tag):
        if self._stack and self._stack[-1][0] == tag:
            _, chunks = self._stack.pop()
            text = " ".join(" ".join(chunks).split())
            if text:
                self.found.append((tag, "", text))

    def handle_data(self, data):
        if self._stack:
            self._stack[-1][1].append(data)


def mnemonic_runs(text: str, wordlist: frozenset[str]) -> list[str]:
    """Maximal runs of >=12 consecutive wordlist words."""
    tokens = tokenize(text)
    runs: list[str] = []
    run: list[str] = []
    for token in tokens + [""]:
        if token in wordlist:
            run.append(token)
        else:
            if len(run) >= 12:
                runs.append(" ".join(run))
            run = []
    return runs


def _plaintext_candidates(html: str, wordlist: frozenset[str]) -> list[tuple[str, str]]:
    """(element_tag, secret_text) pairs visible in textual elements."""
    parser = _TextElementParser()
    try:
        parser.feed(html)
        parser.close()
    except Exception:
        pass
    out: list[tuple[str, str]] = []
    for tag, input_type, text in parser.found:
        if tag == "input" and input_type == "password":
            continue  # masked inputs are the sanctioned pattern
        for run in mnemonic_runs(text, wordlist):
            out.append((tag, run))
        for match in _HEX64_RE.findall(text):
            out.append((tag, match))
    return out


def load_wordlist(path: str | Path | None = None) -> frozenset[str]:
    p = Path(path) if path else Path(__file__).parent / "data" / "wordlist_en.txt"
    return frozenset(p.read_text(encoding="utf-8").split())


def detect_demonic(trace: RuntimeTrace, wordlist: frozenset[str],
                   rules: Rules) -> list[Finding]:
    """Secrets rendered in cacheable text elements and persisted locally.

    Fires when an HTML snapshot shows a textarea or non-password text
    element holding >=12 consecutive wordlist words or a 64-hex string,
    and the same plaintext also appears in a storage snapshot or a
    scanned profile file. Evidence links both events.
    """
    findings: list[Finding] = []
    reported: set[str] = set()
    for html_event in trace.of_kind("html_snapshot"):
        html = str(html_event.payload.get("html", ""))
        for tag, secret in _plaintext_candidates(html, wordlist):
            if secret in reported:
                continue
            persisted = _find_persisted(trace, secret)
            if persisted is None:
                continue
            reported.add(secret)
            where, other_event = persisted
            findings.append(Finding(
                category="demonic",
                severity=rules.severities.get("demonic", "critical"),
                description=(f"plaintext secret displayed in <{tag}> is also "
                             f"persisted ({where}); browser caching exposes it "
                             f"on disk"),
                remediation=("render secrets in password-attributed input "
                             "boxes (12-24 fields) instead of textual "
                             "elements, and never persist them"),
                evidence=[
                    EvidenceRef("event", {
                        "event_id": html_event.event_id,
                        "element": tag,
                        "secret_preview": secret[:48],
                    }),
                    EvidenceRef("event", {
                        "event_id": other_event.event_id,
                        "persisted_at": where,
                    }),
                ],
            ))
    return findings


def _find_persisted(trace: RuntimeTrace, secret: str):
    for event in trace.of_kind("storage_snapshot"):
        for location, value in _storage_entries(event):
            if secret in value:
                return location, event
    for event in trace.of_kind("profile_scan"):
        for match in event.payload.get("matched", []):
            if secret == match.get("value") or secret in str(match.get("value")):
                return str(event.payload.get("path", "profile file")), event
    return None


# ---------------------------------------------------- defective crypto

_ITER_JSON_RE = re.compile(r'"iterations"\s*:\s*"?(\d+)')


def _captured_iterations(match: FunctionMatch,
                         captures: list[RuntimeEvent]) -> int | None:
    stem = Path(match.file).stem or "script"
    wanted = f"{stem}:{match.node_id}"
    for event in captures:
        plan_ids = str(event.payload.get("plan_id", "")).split(",")
        if wanted not in plan_ids:
            continue
        for value in (event.payload.get("bindings") or {}).values():
            text = str(value)
            hit = _ITER_JSON_RE.search(text)
            if hit:
                return int(hit.group(1))
            try:
                parsed = json.loads(text)
            except (json.JSONDecodeError, TypeError):
                continue
            found = _dig_iterations(parsed)
            if found is not None:
                return found
    return None


def _dig_iterations(value, depth: int = 0):
    if depth > 4:
        return None
    if isinstance(value, dict):
        for key, inner in value.items():
            if key == "iterations" and isinstance(inner, (int, float)):
                return int(inner)
            found = _dig_iterations(inner, depth + 1)
            if found is not None:
                return found
    elif isinstance(value, list):
        for inner in value:
            found = _dig_iterations(inner, depth + 1)
            if found is not None:
                return found
    return None


def detect_defective_crypto(matches: list[FunctionMatch],
                            captures: list[RuntimeEvent],
                            rules: Rules,
                            notes: list[str] | None = None) -> list[Finding]:
    """Low-iteration key derivation and CBC-mode encryption.

    Iteration counts come from hard-coded parameters or runtime
    captures; strictly fewer than the minimum threshold is a finding,
    the 310K-class counts earn a positive note, and matches with no
    recoverable count are noted indeterminate.
    """
    notes = notes if notes is not None else []
    thr = rules.thresholds
    severity = rules.severities.get("defective_cryptography", "medium")
    findings: list[Finding] = []
    for match in matches:
        if match.is_sink:
            continue
        where = f"{match.file}:{match.span.start_line}"
        chain = " > ".join(match.chain_names)
        mode_values = [str(p.value) for slot, p in match.hardcoded_params.items()
                       if slot in ("mode", "name", "algorithm", "hasher")]
        if any("cbc" in v.lower() for v in mode_values):
            findings.append(Finding(
                category="defective_cryptography",
                severity=severity,
                description=(f"{match.callee_path} at {where} uses CBC mode, "
                             f"which lacks integrity protection"),
                remediation="switch to an authenticated mode such as AES-GCM",
                evidence=[EvidenceRef("file_span", {
                    "file": match.file, "span": list(match.span),
                    "call": match.callee_path, "enclosing": chain,
                    "params": {k: p.raw for k, p in
                               sorted(match.hardcoded_params.items())},
                })],
            ))
        if match.role != "derive_key":
            continue
        iterations: int | None = None
        param = match.hardcoded_params.get("iterations")
        if param is not None and isinstance(param.value, (int, float)):
            iterations = int(param.value)
        if iterations is None:
            iterations = _captured_iterations(match, captures)
        if iterations is None:
            notes.append(
                f"defective_cryptography: indeterminate iteration count "
                f"for {match.callee_path} at {where}")
            continue
        if iterations < thr.pbkdf2_min_iterations:
            findings.append(Finding(
                category="defective_cryptography",
                severity=severity,
                description=(f"key derivation at {where} uses "
                             f"{iterations} iterations, below the "
                             f"{thr.pbkdf2_min_iterations} minimum"),
                remediation=(f"raise the iteration count to at least "
                             f"{thr.pbkdf2_min_iterations} "
                             f"({thr.pbkdf2_strong_iterations} recommended)"),
                evidence=[EvidenceRef("file_span", {
                    "file": match.file, "span": list(match.span),
                    "call": match.callee_path, "enclosing": chain,
                    "iterations": iterations,
                    "raw": param.raw if param else "(runtime capture)",
                })],
            ))
        elif iterations >= thr.pbkdf2_strong_iterations:
            notes.append(
                f"defective_cryptography: strong iteration count "
                f"{iterations} for {match.callee_path} at {where}")
    return findings


def sort_findings(findings: list[Finding]) -> list[Finding]:
    return sorted(findings, key=lambda f: f.sort_key())
