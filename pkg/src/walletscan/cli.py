"""Command-line interface: scan, replay, corpus.

Exit codes: 0 no findings, 1 findings present, 2 fatal error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import os
import sys
from pathlib import Path

from .harness import HarnessConfig
from .report import (FatalLoadError, ScanConfig, dynamic_findings,
                     render_findings_json, render_report, scan)
from .rules import default_rules, load_rules
from .semantics import default_semantics_db, load_semantics_db
from .trace import load_trace


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walletscan",
        description="vulnerability scanner for browser-based wallet extensions")
    sub = parser.add_subparsers(dest="command", required=True)

    scan_p = sub.add_parser("scan", help="scan one extension bundle")
    scan_p.add_argument("--ext", required=True,
                        help="extension directory, .zip, or .crx")
    scan_p.add_argument("--mode", choices=("static", "full"), default="static")
    scan_p.add_argument("--rules", help="rules JSON (default: bundled)")
    scan_p.add_argument("--semantics", help="semantics db JSON (default: bundled)")
    scan_p.add_argument("--webdriver-url",
                        default=os.environ.get("WR_WEBDRIVER_URL", ""))
    scan_p.add_argument("--profile-dir", default="")
    scan_p.add_argument("--agent-file", action="append", default=[],
                        help="agent script injected into the bundle "
                             "(full mode; repeatable)")
    scan_p.add_argument("--report", help="write the report here (default: stdout)")
    scan_p.add_argument("--format", choices=("json", "text"), default="text")
    scan_p.add_argument("--trace-out",
                        help="persist runtime traces under this prefix")
    scan_p.add_argument("--bundle-out",
                        help="write the instrumented bundle here")
    scan_p.add_argument("--headful", action="store_true",
                        help="run the browser with a visible window")

    replay_p = sub.add_parser("replay",
                              help="re-run trace-driven detectors offline")
    replay_p.add_argument("--trace", required=True, action="append",
                          help="trace JSONL (repeatable)")
    replay_p.add_argument("--rules", help="rules JSON (default: bundled)")
    replay_p.add_argument("--report", help="write findings JSON here")

    corpus_p = sub.add_parser("corpus", help="scan every bundle in a directory")
    corpus_p.add_argument("--dir", required=True)
    corpus_p.add_argument("--mode", choices=("static", "full"), default="static")
    corpus_p.add_argument("--rules")
    corpus_p.add_argument("--semantics")
    corpus_p.add_argument("--webdriver-url",
                          default=os.environ.get("WR_WEBDRIVER_URL", ""))
    corpus_p.add_argument("--agent-file", action="append", default=[])
    corpus_p.add_argument("--report-dir", help="per-bundle report output dir")
    corpus_p.add_argument("--jobs", type=int, default=2)
    return parser


def _scan_config(args) -> ScanConfig:
    rules = load_rules(Path(args.rules).read_text(encoding="utf-8")) \
        if getattr(args, "rules", None) else default_rules()
    semantics = load_semantics_db(Path(args.semantics).read_text(encoding="utf-8")) \
        if getattr(args, "semantics", None) else default_semantics_db()
    harness = HarnessConfig(
        webdriver_url=getattr(args, "webdriver_url", ""),
        browser_profile_dir=getattr(args, "profile_dir", ""),
        headless=not getattr(args, "headful", False),
    )
    agent_scripts = {}
    for agent in getattr(args, "agent_file", []) or []:
        path = Path(agent)
        agent_scripts[f"__wr_{path.name}" if not path.name.startswith("__wr_")
                      else path.name] = path.read_text(encoding="utf-8")
    return ScanConfig(rules=rules, semantics=semantics, harness=harness,
                      agent_scripts=agent_scripts,
                      trace_out=getattr(args, "trace_out", None),
                      bundle_out=getattr(args, "bundle_out", None))


def _emit(data: bytes, dest: str | None) -> None:
    if dest:
        Path(dest).parent.mkdir(parents=True, exist_ok=True)
        Path(dest).write_bytes(data)
    else:
        sys.stdout.write(data.decode())


def _cmd_scan(args) -> int:
    cfg = _scan_config(args)
    if args.mode == "full" and not cfg.harness.webdriver_url:
        print("full mode needs --webdriver-url or WR_WEBDRIVER_URL",
              file=sys.stderr)
        return 2
    try:
        report = scan(args.ext, args.mode, cfg)
    except FatalLoadError as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 2
    _emit(render_report(report, args.format), args.report)
    return 1 if report.findings else 0


def _cmd_replay(args) -> int:
    rules = load_rules(Path(args.rules).read_text(encoding="utf-8")) \
        if args.rules else default_rules()
    cfg = ScanConfig(rules=rules)
    try:
        traces = [load_trace(path) for path in args.trace]
    except (OSError, ValueError) as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 2
    findings, notes = dynamic_findings(traces, None, cfg)
    _emit(render_findings_json(findings), args.report)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    return 1 if findings else 0


def _cmd_corpus(args) -> int:
    base = Path(args.dir)
    if not base.is_dir():
        print(f"fatal: {base} is not a directory", file=sys.stderr)
        return 2
    bundles = sorted(p for p in base.iterdir()
                     if p.is_dir() or p.suffix.lower() in (".zip", ".crx"))
    if not bundles:
        print("fatal: no bundles found", file=sys.stderr)
        return 2

    def one(bundle: Path):
        cfg = _scan_config(args)
        try:
            report = scan(bundle, args.mode, cfg)
            return bundle.name, report, None
        except Exception as exc:
            return bundle.name, None, str(exc)

    any_findings = False
    failures = 0
    with concurrent.futures.ThreadPoolExecutor(max_workers=max(args.jobs, 1)) as pool:
        for name, report, error in pool.map(one, bundles):
            if error is not None:
                failures += 1
                print(f"{name}: FAILED ({error})")
                continue
            counts: dict[str, int] = {}
            for finding in report.findings:
                counts[finding.category] = counts.get(finding.category, 0) + 1
            summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) \
                or "clean"
            print(f"{name}: {summary}")
            any_findings = any_findings or bool(report.findings)
            if args.report_dir:
                out = Path(args.report_dir) / f"{name}.json"
                out.parent.mkdir(parents=True, exist_ok=True)
                out.write_bytes(render_report(report, "json"))
    if failures == len(bundles):
        return 2
    return 1 if any_findings else 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "scan":
        return _cmd_scan(args)
    if args.command == "replay":
        return _cmd_replay(args)
    if args.command == "corpus":
        return _cmd_corpus(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
