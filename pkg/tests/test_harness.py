"""Route execution, probing, and polling tests over the fake wallet."""

import pytest

from walletscan.harness import (
    Harness, HarnessConfig, Session, create_route, import_route,
)
from walletscan.semantics import default_semantics_db
from walletscan.trace import RuntimeTrace, SensitiveCorpus

from fake_wallet import MNEMONIC, FakeSession, FakeWallet, mixed_password


class FakeClock:
    def __init__(self, start: float = 1000.0):
        self.now = start

    def time(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.now += seconds


def make_harness(wallet: FakeWallet, **cfg_kw):
    cfg = HarnessConfig(webdriver_url="fake", **cfg_kw)
    session = Session(wire=FakeSession(wallet), extension_id="fakeext",
                      bundle=None, agent_source="", start_url="ext://start")
    clock = FakeClock()
    harness = Harness(cfg, session, default_semantics_db(),
                      time_fn=clock.time, sleep_fn=clock.sleep)
    return harness, clock


def test_create_route_completes_and_captures_mnemonic():
    wallet = FakeWallet(accept_password=mixed_password)
    harness, _ = make_harness(wallet)
    trace = harness.run_route(create_route())
    assert trace.completed, trace.failure_reason
    assert trace.sensitive_corpus.mnemonic_words == MNEMONIC
    assert trace.sensitive_corpus.password_used == "abc12345"
    page_ids = [e.payload["page_id"] for e in trace.of_kind("action_log")
                if e.payload.get("action") == "page"]
    assert "mnemonic_display" in page_ids
    assert len(trace.of_kind("storage_snapshot")) >= 1


def test_import_route_traverses_unlock_and_backup():
    wallet = FakeWallet(accept_password=mixed_password)
    harness, _ = make_harness(wallet)
    trace = harness.run_route(import_route())
    assert trace.completed, trace.failure_reason
    page_ids = [e.payload["page_id"] for e in trace.of_kind("action_log")
                if e.payload.get("action") == "page"]
    assert "wallet_unlock" in page_ids
    assert trace.sensitive_corpus.mnemonic_words == \
        list(HarnessConfig(webdriver_url="x").mnemonic_words)
    log = [e.payload.get("action") for e in trace.of_kind("action_log")]
    assert "backup_reached" in log


def test_probe_ladder_stops_at_first_acceptance():
    wallet = FakeWallet(accept_password=mixed_password)
    wallet.page = "password"
    wallet.mode = "create"
    harness, _ = make_harness(wallet)
    harness.trace = RuntimeTrace(extension_id="x", route_id="create",
                                 sensitive_corpus=SensitiveCorpus())
    probe = harness.probe_password_policy()
    assert probe.weakest_accepted == "abc12345"
    assert [c for c, _ in probe.attempts] == \
        ["123", "123456", "abcdef", "12345678", "abc12345"]
    assert [ok for _, ok in probe.attempts] == [False] * 4 + [True]
    assert not probe.inconclusive


def test_probe_accept_anything_wallet():
    wallet = FakeWallet(accept_password=lambda pw: True)
    wallet.page = "password"
    wallet.mode = "create"
    harness, _ = make_harness(wallet)
    harness.trace = RuntimeTrace(extension_id="x", route_id="create",
                                 sensitive_corpus=SensitiveCorpus())
    probe = harness.probe_password_policy()
    assert probe.weakest_accepted == "123"


def test_probe_six_digit_wallet():
    wallet = FakeWallet(accept_password=lambda pw: len(pw) >= 6 and pw.isdigit())
    wallet.page = "password"
    wallet.mode = "create"
    harness, _ = make_harness(wallet)
    harness.trace = RuntimeTrace(extension_id="x", route_id="create",
                                 sensitive_corpus=SensitiveCorpus())
    probe = harness.probe_password_policy()
    assert probe.weakest_accepted == "123456"


def test_trace_timestamps_monotone_and_snapshots_change_gated():
    wallet = FakeWallet(accept_password=mixed_password)
    harness, _ = make_harness(wallet)
    trace = harness.run_route(import_route())
    stamps = [e.timestamp for e in trace.events]
    assert stamps == sorted(stamps)
    snapshots = trace.of_kind("storage_snapshot")
    seen = set()
    for event in snapshots:
        key = str(sorted(event.payload["localStorage"].items())) + \
            str(sorted(event.payload["sessionStorage"].items()))
        assert key not in seen, "identical consecutive storage snapshot"
        seen.add(key)


def test_sensitive_corpus_closure():
    """Every credential value typed by the harness lands in the corpus."""
    wallet = FakeWallet(accept_password=mixed_password)
    harness, _ = make_harness(wallet)
    trace = harness.run_route(import_route())
    corpus_values = set(trace.sensitive_corpus.mnemonic_words)
    if trace.sensitive_corpus.password_used:
        corpus_values.add(trace.sensitive_corpus.password_used)
    probe_candidates = set()
    for event in trace.of_kind("action_log"):
        if event.payload.get("action") == "password_probe":
            probe_candidates = {c for c, _ in event.payload["attempts"]}
    for event in trace.of_kind("action_log"):
        if event.payload.get("action") != "fill":
            continue
        credential = event.payload.get("credential")
        value = event.payload.get("value")
        if credential in ("password", "mnemonic") and value:
            assert value in corpus_values
        elif credential == "password_probe" and value:
            assert value in probe_candidates or value in corpus_values


def test_poll_cadence_under_idle_page():
    wallet = FakeWallet()
    harness, clock = make_harness(wallet)
    harness.trace = RuntimeTrace(extension_id="x", route_id="create",
                                 sensitive_corpus=SensitiveCorpus())
    starts = []
    for _ in range(4):
        harness.poll_runtime()
        starts.append(harness._last_poll_time)
        clock.sleep(harness.cfg.poll_interval_ms / 1000.0)
    gaps = [b - a for a, b in zip(starts, starts[1:])]
    assert all(abs(gap - 1.0) <= 0.25 for gap in gaps)


def test_idle_second_poll_emits_no_snapshots():
    wallet = FakeWallet()
    harness, _ = make_harness(wallet)
    harness.trace = RuntimeTrace(extension_id="x", route_id="create",
                                 sensitive_corpus=SensitiveCorpus())
    first = harness.poll_runtime()
    second = harness.poll_runtime()
    assert any(e.kind == "storage_snapshot" for e in first)
    assert [e for e in second if e.kind in ("storage_snapshot",
                                            "html_snapshot")] == []


def test_param_capture_drained_into_events_and_corpus():
    wallet = FakeWallet(accept_password=lambda pw: True,
                        weak_crypto_capture=True)
    harness, _ = make_harness(wallet)
    trace = harness.run_route(import_route())
    captures = trace.of_kind("param_capture")
    assert captures, "instrumented capture should surface in the trace"
    assert captures[0].payload["plan_id"] == "vault:7"
    assert any("iterations" in v
               for v in trace.sensitive_corpus.intermediate_crypto_values)


def test_profile_scan_matches_corpus_values(tmp_path):
    wallet = FakeWallet()
    harness, _ = make_harness(wallet, browser_profile_dir=str(tmp_path))
    harness.trace = RuntimeTrace(extension_id="x", route_id="create",
                                 sensitive_corpus=SensitiveCorpus(
                                     password_used="abc12345",
                                     mnemonic_words=list(MNEMONIC)))
    cache = tmp_path / "Sessions" / "Tabs_1"
    cache.parent.mkdir()
    cache.write_bytes(b"junk " + " ".join(MNEMONIC).encode("utf-16-le") + b" junk")
    events = harness.poll_runtime()
    scans = [e for e in events if e.kind == "profile_scan"]
    assert len(scans) == 1
    assert scans[0].payload["matched"][0]["label"] == "mnemonic"


def test_unknown_wallet_page_fails_route_with_reason():
    class StuckWallet(FakeWallet):
        def render(self):
            return "<html><body><p>Totally unrelated content.</p></body></html>"

    harness, _ = make_harness(StuckWallet(), per_page_timeout_s=5.0)
    trace = harness.run_route(create_route())
    assert not trace.completed
    assert trace.failure_reason == "unknown_page"
    # the last observation rides along for diagnosis
    tail = trace.events[-1]
    assert tail.kind == "html_snapshot" and "unrelated" in tail.payload.get(
        "text", "") + tail.payload.get("html", "")


def test_route_timeout_reported():
    class LoopingWallet(FakeWallet):
        def _click_start(self, elem_id):
            pass  # never advances

    harness, _ = make_harness(LoopingWallet(), per_page_timeout_s=500.0,
                              route_timeout_s=30.0)
    trace = harness.run_route(create_route())
    assert not trace.completed
    assert trace.failure_reason == "route_timeout"


def test_config_validation():
    with pytest.raises(ValueError):
        HarnessConfig(webdriver_url="x", poll_interval_ms=100)
    with pytest.raises(ValueError):
        HarnessConfig(webdriver_url="x", mnemonic_words=["a", "b"])
