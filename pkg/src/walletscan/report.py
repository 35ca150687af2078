"""Scan orchestration and report rendering.

A scan always produces a report, even on partial failure: anything that
degrades (unparseable script, failed route, indeterminate crypto
parameters) becomes a note. Dynamic traces are persisted before
detection so `replay` can reproduce the dynamic findings offline.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import jsast
from .analysis import (FunctionMatch, InstrumentationPlan, ScopeModel,
                       TaintTrace, backtrack_taint, match_valuable_functions,
                       plan_instrumentation)
from .detectors import (Finding, detect_clickjacking, detect_defective_crypto,
                        detect_demonic, detect_password_policy,
                        detect_redundant_storage, detect_xss, load_wordlist,
                        sort_findings)
from .harness import (Harness, HarnessConfig, NavigationRoute,
                      create_route, import_route, open_session)
from .instrument import apply_instrumentation, package_instrumented
from .loader import ExtensionPackage, LoaderError, load_extension
from .rules import Rules, default_rules
from .semantics import (PageClassification, SemanticsDb, classify_page,
                        default_semantics_db, observe_html)
from .trace import RuntimeTrace, save_trace

REPORT_SCHEMA_VERSION = 1


class FatalLoadError(Exception):
    pass


@dataclass
class ScanConfig:
    rules: Rules = field(default_factory=default_rules)
    semantics: SemanticsDb = field(default_factory=default_semantics_db)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    agent_scripts: dict[str, str] = field(default_factory=dict)
    trace_out: str | None = None
    bundle_out: str | None = None
    keep_session_open: bool = False


@dataclass
class ScanStats:
    scripts_total: int = 0
    files_parsed: int = 0
    parse_unsupported: int = 0
    parse_failed: int = 0
    html_pages: int = 0
    matches: int = 0
    taint_traces: int = 0
    instrumentation_plans: int = 0
    pages_visited: int = 0
    events_collected: int = 0
    routes_completed: int = 0

    def to_json(self) -> dict:
        return {
            "scripts_total": self.scripts_total,
            "files_parsed": self.files_parsed,
            "parse_unsupported": self.parse_unsupported,
            "parse_failed": self.parse_failed,
            "html_pages": self.html_pages,
            "matches": self.matches,
            "taint_traces": self.taint_traces,
            "instrumentation_plans": self.instrumentation_plans,
            "pages_visited": self.pages_visited,
            "events_collected": self.events_collected,
            "routes_completed": self.routes_completed,
        }


@dataclass
class Report:
    target: str
    mode: str
    manifest_sha256: str
    started_at: str
    finished_at: str
    findings: list[Finding]
    notes: list[str]
    stats: ScanStats

    def to_json(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "target": self.target,
            "mode": self.mode,
            "manifest_sha256": self.manifest_sha256,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "findings": [f.to_json() for f in self.findings],
            "notes": list(self.notes),
            "stats": self.stats.to_json(),
        }


@dataclass
class StaticArtifacts:
    pkg: ExtensionPackage
    roots: dict[str, jsast.AstRoot]
    models: dict[str, ScopeModel]
    matches: list[FunctionMatch]
    taint_traces: list[TaintTrace]
    plans: list[InstrumentationPlan]
    page_classes: dict[str, PageClassification]
    notes: list[str]
    stats: ScanStats


def _now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def analyze_static(pkg: ExtensionPackage, cfg: ScanConfig) -> StaticArtifacts:
    """Parse, match, backtrack, plan: the whole static phase."""
    notes = list(pkg.notes)
    stats = ScanStats(scripts_total=len(pkg.scripts),
                      html_pages=len(pkg.html_pages))
    roots: dict[str, jsast.AstRoot] = {}
    models: dict[str, ScopeModel] = {}
    matches: list[FunctionMatch] = []
    traces: list[TaintTrace] = []
    plans: list[InstrumentationPlan] = []
    for script in pkg.scripts:
        try:
            root = jsast.parse_script(script.normalized_source, script.path)
        except jsast.ParseUnsupported as exc:
            stats.parse_unsupported += 1
            notes.append(f"{script.path}: outside supported grammar ({exc})")
            continue
        except jsast.ParseError as exc:
            stats.parse_failed += 1
            notes.append(f"{script.path}: not parseable ({exc})")
            continue
        stats.files_parsed += 1
        roots[script.path] = root
        model = ScopeModel(root)
        models[script.path] = model
        file_matches = match_valuable_functions(root, cfg.rules.db, model)
        matches.extend(file_matches)
        for match in file_matches:
            if match.is_sink:
                traces.extend(backtrack_taint(root, match, cfg.rules.db, model))
            elif match.role in ("derive_key", "decrypt", "encrypt", "hash"):
                plans.append(plan_instrumentation(root, match, model))
    page_classes = {
        page.path: classify_page(observe_html(page.raw_text), cfg.semantics)
        for page in pkg.html_pages
    }
    stats.matches = len(matches)
    stats.taint_traces = len(traces)
    stats.instrumentation_plans = len(plans)
    return StaticArtifacts(pkg=pkg, roots=roots, models=models,
                           matches=matches, taint_traces=traces, plans=plans,
                           page_classes=page_classes, notes=notes, stats=stats)


def static_findings(artifacts: StaticArtifacts, cfg: ScanConfig,
                    captures=None) -> tuple[list[Finding], list[str]]:
    notes: list[str] = []
    findings = []
    findings += detect_clickjacking(artifacts.pkg.manifest,
                                    artifacts.page_classes, cfg.rules)
    findings += detect_xss(artifacts.taint_traces, artifacts.pkg.manifest,
                           cfg.rules, notes)
    findings += detect_defective_crypto(artifacts.matches, captures or [],
                                        cfg.rules, notes)
    return findings, notes


def dynamic_findings(traces: list[RuntimeTrace], artifacts: StaticArtifacts | None,
                     cfg: ScanConfig) -> tuple[list[Finding], list[str]]:
    """Trace-driven detectors; also re-runs the crypto detector when
    static artifacts are available so runtime captures can settle
    previously indeterminate matches."""
    notes: list[str] = []
    findings: list[Finding] = []
    wordlist = load_wordlist()
    captures = []
    for trace in traces:
        captures.extend(trace.of_kind("param_capture"))
        findings += detect_password_policy(trace.probe_result(), cfg.rules)
        findings += detect_redundant_storage(trace, cfg.rules)
        findings += detect_demonic(trace, wordlist, cfg.rules)
        if not trace.completed:
            notes.append(f"route {trace.route_id}: incomplete "
                         f"({trace.failure_reason})")
    if artifacts is not None and captures:
        findings += detect_defective_crypto(artifacts.matches, captures,
                                            cfg.rules, notes)
    return _dedupe(findings), notes


def _dedupe(findings: list[Finding]) -> list[Finding]:
    seen: set[tuple] = set()
    out = []
    for finding in findings:
        key = (finding.category, finding.severity, finding.description)
        if key in seen:
            continue
        seen.add(key)
        out.append(finding)
    return out


def run_routes(artifacts: StaticArtifacts, cfg: ScanConfig,
               routes: list[NavigationRoute] | None = None,
               ) -> tuple[list[RuntimeTrace], list[str]]:
    """Instrument, package, and drive both navigation routes live."""
    notes: list[str] = []
    pkg = artifacts.pkg
    plans_by_file: dict[str, list[InstrumentationPlan]] = {}
    for plan in artifacts.plans:
        plans_by_file.setdefault(plan.file, []).append(plan)
    rewritten: dict[str, str] = {}
    for script in pkg.scripts:
        file_plans = plans_by_file.get(script.path, [])
        if not file_plans:
            continue
        rewritten[script.path] = apply_instrumentation(script, file_plans,
                                                       notes)
    out_root = Path(cfg.bundle_out) if cfg.bundle_out else \
        Path(tempfile.mkdtemp(prefix="walletscan-run-")) / "bundle"
    bundle = package_instrumented(pkg, rewritten, cfg.agent_scripts,
                                  out_root, plans=artifacts.plans)
    traces: list[RuntimeTrace] = []
    routes = routes or [create_route(), import_route()]
    for route in routes:
        harness_cfg = cfg.harness
        profile = Path(tempfile.mkdtemp(
            prefix=f"walletscan-profile-{route.route_id}-"))
        route_cfg = HarnessConfig(
            webdriver_url=harness_cfg.webdriver_url,
            browser_profile_dir=str(profile),
            per_page_timeout_s=harness_cfg.per_page_timeout_s,
            route_timeout_s=harness_cfg.route_timeout_s,
            poll_interval_ms=harness_cfg.poll_interval_ms,
            password_ladder=list(harness_cfg.password_ladder),
            mnemonic_words=list(harness_cfg.mnemonic_words),
            headless=harness_cfg.headless,
            rng_seed=harness_cfg.rng_seed,
        )
        session = open_session(route_cfg, bundle)
        try:
            harness = Harness(route_cfg, session, cfg.semantics)
            traces.append(harness.run_route(route))
        finally:
            if not cfg.keep_session_open:
                session.wire.quit()
    # traces always hit disk before any detector consumes them
    trace_prefix = cfg.trace_out or str(out_root.parent / "trace")
    for trace in traces:
        trace_path = f"{trace_prefix}.{trace.route_id}.jsonl"
        save_trace(trace, trace_path)
        notes.append(f"route {trace.route_id}: trace persisted to {trace_path}")
    return traces, notes


def scan(path: str | Path, mode: str, cfg: ScanConfig | None = None) -> Report:
    """Run the pipeline over one extension bundle.

    static: load, parse, match, backtrack, static detectors.
    full: additionally instrument, drive both routes, all six detectors.
    """
    cfg = cfg or ScanConfig()
    started = _now_iso()
    try:
        pkg = load_extension(path)
    except LoaderError as exc:
        raise FatalLoadError(str(exc)) from exc
    manifest_sha = hashlib.sha256(
        (Path(pkg.root_path) / "manifest.json").read_bytes()).hexdigest()
    artifacts = analyze_static(pkg, cfg)
    findings, notes = static_findings(artifacts, cfg)
    all_notes = artifacts.notes + notes
    stats = artifacts.stats

    if mode == "full":
        try:
            traces, run_notes = run_routes(artifacts, cfg)
            all_notes.extend(run_notes)
            dyn_findings, dyn_notes = dynamic_findings(traces, artifacts, cfg)
            findings = _dedupe(findings + dyn_findings)
            all_notes.extend(dyn_notes)
            stats.routes_completed = sum(1 for t in traces if t.completed)
            stats.events_collected = sum(len(t.events) for t in traces)
            visited: set[str] = set()
            for trace in traces:
                for event in trace.of_kind("action_log"):
                    if event.payload.get("action") == "page" and \
                            event.payload.get("page_id") not in (None, "unknown"):
                        visited.add(str(event.payload["page_id"]))
            stats.pages_visited = len(visited)
        except Exception as exc:  # dynamic failures degrade to notes
            all_notes.append(f"dynamic phase failed: {exc}")
    elif mode != "static":
        raise ValueError(f"unknown scan mode {mode!r}")

    return Report(
        target=str(path),
        mode=mode,
        manifest_sha256=manifest_sha,
        started_at=started,
        finished_at=_now_iso(),
        findings=sort_findings(findings),
        notes=all_notes,
        stats=stats,
    )


# ----------------------------------------------------------- rendering

def render_findings_json(findings: list[Finding]) -> bytes:
    payload = [f.to_json() for f in sort_findings(findings)]
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode()


def render_report(report: Report, format: str = "json") -> bytes:
    if format == "json":
        return (json.dumps(report.to_json(), indent=2, ensure_ascii=False)
                + "\n").encode()
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    lines = [
        f"walletscan report for {report.target}",
        f"mode: {report.mode}   manifest: {report.manifest_sha256[:16]}",
        f"started: {report.started_at}   finished: {report.finished_at}",
        "",
    ]
    if not report.findings:
        lines.append("no findings")
    by_severity: dict[str, list[Finding]] = {}
    for finding in report.findings:
        by_severity.setdefault(finding.severity, []).append(finding)
    for severity in ("critical", "high", "medium", "low"):
        group = by_severity.get(severity)
        if not group:
            continue
        lines.append(f"[{severity.upper()}] {len(group)} finding(s)")
        for finding in group:
            lines.append(f"  - {finding.category}: {finding.description}")
            first = finding.evidence[0].detail if finding.evidence else {}
            where = first.get("file")
            if where and first.get("span"):
                span = first["span"]
                lines.append(f"      at {where}:{span[0]}")
            elif where:
                lines.append(f"      at {where}")
            lines.append(f"      fix: {finding.remediation}")
        lines.append("")
    if report.notes:
        lines.append(f"notes ({len(report.notes)}):")
        lines.extend(f"  * {note}" for note in report.notes)
        lines.append("")
    stats = report.stats.to_json()
    lines.append("stats: " + ", ".join(f"{k}={v}" for k, v in stats.items()))
    return ("\n".join(lines) + "\n").encode()
