"""Report rendering, scan wiring, trace replay, and CLI contract tests."""

import json
from pathlib import Path

import pytest

from walletscan.cli import main
from walletscan.detectors import Finding
from walletscan.report import (FatalLoadError, Report, ScanConfig, ScanStats,
                               render_findings_json, render_report, scan)
from walletscan.trace import load_trace, save_trace

GOLDEN = Path(__file__).parent / "fixtures" / "golden"
STATIC = Path(__file__).parent / "fixtures" / "static"


def test_render_json_byte_stable():
    report = Report(target="x", mode="static", manifest_sha256="ab",
                    started_at="2024-01-01T00:00:00Z",
                    finished_at="2024-01-01T00:00:05Z",
                    findings=[Finding("xss", "high", "d", "r")],
                    notes=["n"], stats=ScanStats())
    assert render_report(report, "json") == render_report(report, "json")
    payload = json.loads(render_report(report, "json"))
    assert list(payload) == ["schema_version", "target", "mode",
                             "manifest_sha256", "started_at", "finished_at",
                             "findings", "notes", "stats"]


def test_render_empty_report_schema_valid():
    report = Report(target="x", mode="static", manifest_sha256="0" * 64,
                    started_at="t0", finished_at="t1", findings=[],
                    notes=[], stats=ScanStats())
    payload = json.loads(render_report(report, "json"))
    assert payload["findings"] == []
    schema = json.loads(
        (Path(__file__).parent.parent / "src" / "walletscan" / "data" /
         "report.schema.json").read_text())
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(payload, schema)


def test_render_text_contains_location():
    report = Report(target="x", mode="static", manifest_sha256="ab",
                    started_at="t0", finished_at="t1",
                    findings=[Finding("xss", "high", "bad sink", "fix it",
                                      evidence=[])],
                    notes=[], stats=ScanStats())
    text = render_report(report, "text").decode()
    assert "xss" in text and "HIGH" in text and "bad sink" in text


def test_scan_missing_bundle_is_fatal(tmp_path):
    with pytest.raises(FatalLoadError):
        scan(tmp_path / "nope", "static")


def test_scan_rejects_unknown_mode(tmp_path):
    bundle = tmp_path / "b"
    bundle.mkdir()
    (bundle / "manifest.json").write_text('{"manifest_version": 2}')
    with pytest.raises(ValueError):
        scan(bundle, "turbo")


def test_clean_fixture_static_scan():
    report = scan(STATIC / "clickjack_neg_nowar", "static")
    assert report.findings == []
    assert report.stats.html_pages == 1


def test_composite_fixture_two_categories():
    """Exposed-page bundle with the hash-to-DOM script: clickjacking + xss."""
    report = scan(STATIC / "clickjack_pos", "static")
    categories = {f.category for f in report.findings}
    assert categories == {"clickjacking"}
    report2 = scan(STATIC / "xss_pos", "static")
    assert {f.category for f in report2.findings} == {"xss"}


def test_replay_reproduces_golden(tmp_path):
    trace = load_trace(GOLDEN / "recorded_trace.jsonl")
    from walletscan.report import dynamic_findings
    findings, _ = dynamic_findings([trace], None, ScanConfig())
    assert render_findings_json(findings) == \
        (GOLDEN / "golden_findings.json").read_bytes()


def test_trace_roundtrip(tmp_path):
    trace = load_trace(GOLDEN / "recorded_trace.jsonl")
    out = tmp_path / "copy.jsonl"
    save_trace(trace, out)
    again = load_trace(out)
    assert again.extension_id == trace.extension_id
    assert len(again.events) == len(trace.events)
    assert again.sensitive_corpus.to_json() == trace.sensitive_corpus.to_json()
    assert again.completed == trace.completed


# ------------------------------------------------------------------ CLI

def test_cli_scan_exit_codes(tmp_path, capsys):
    clean = main(["scan", "--ext", str(STATIC / "clickjack_neg_nowar"),
                  "--mode", "static"])
    assert clean == 0
    dirty = main(["scan", "--ext", str(STATIC / "crypto_pos"),
                  "--mode", "static"])
    assert dirty == 1
    fatal = main(["scan", "--ext", str(tmp_path / "missing"),
                  "--mode", "static"])
    assert fatal == 2


def test_cli_scan_json_report_file(tmp_path):
    out = tmp_path / "report.json"
    code = main(["scan", "--ext", str(STATIC / "crypto_pos"),
                 "--mode", "static", "--format", "json",
                 "--report", str(out)])
    assert code == 1
    payload = json.loads(out.read_text())
    assert payload["mode"] == "static"
    assert payload["findings"][0]["category"] == "defective_cryptography"


def test_cli_full_mode_requires_endpoint(monkeypatch):
    monkeypatch.delenv("WR_WEBDRIVER_URL", raising=False)
    code = main(["scan", "--ext", str(STATIC / "crypto_pos"),
                 "--mode", "full", "--webdriver-url", ""])
    assert code == 2


def test_cli_replay_golden(tmp_path, capsys):
    out = tmp_path / "findings.json"
    code = main(["replay", "--trace", str(GOLDEN / "recorded_trace.jsonl"),
                 "--report", str(out)])
    assert code == 1
    assert out.read_bytes() == (GOLDEN / "golden_findings.json").read_bytes()


def test_cli_replay_missing_trace(tmp_path):
    assert main(["replay", "--trace", str(tmp_path / "nope.jsonl")]) == 2


def test_cli_corpus_static(tmp_path, capsys):
    code = main(["corpus", "--dir", str(STATIC), "--mode", "static",
                 "--report-dir", str(tmp_path / "reports"), "--jobs", "3"])
    assert code == 1
    out = capsys.readouterr().out
    assert "crypto_pos: defective_cryptography=1" in out
    assert "clickjack_neg_nowar: clean" in out
    reports = list((tmp_path / "reports").glob("*.json"))
    assert len(reports) == 9


def test_cli_corpus_empty_dir(tmp_path):
    assert main(["corpus", "--dir", str(tmp_path)]) == 2
