"""Runtime trace model and JSON-lines persistence.

A trace is the complete record of one navigation route: time-ordered
events plus the sensitive values the harness itself typed. Traces are
always persisted before detection so dynamic findings stay auditable
and replayable offline (`walletscan replay`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

EVENT_KINDS = ("storage_snapshot", "html_snapshot", "param_capture",
               "profile_scan", "action_log")

TRACE_FORMAT_VERSION = 1


@dataclass
class RuntimeEvent:
    event_id: int
    timestamp: float
    kind: str
    payload: dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "event_id": self.event_id,
                "timestamp": self.timestamp, "payload": self.payload}


@dataclass
class SensitiveCorpus:
    password_used: str | None = None
    mnemonic_words: list[str] = field(default_factory=list)
    private_keys_observed: list[str] = field(default_factory=list)
    intermediate_crypto_values: list[str] = field(default_factory=list)

    @property
    def mnemonic_phrase(self) -> str:
        return " ".join(self.mnemonic_words)

    def to_json(self) -> dict:
        return {
            "password_used": self.password_used,
            "mnemonic_words": list(self.mnemonic_words),
            "private_keys_observed": list(self.private_keys_observed),
            "intermediate_crypto_values": list(self.intermediate_crypto_values),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SensitiveCorpus":
        return cls(
            password_used=data.get("password_used"),
            mnemonic_words=list(data.get("mnemonic_words", [])),
            private_keys_observed=list(data.get("private_keys_observed", [])),
            intermediate_crypto_values=list(
                data.get("intermediate_crypto_values", [])),
        )


@dataclass
class PasswordProbeResult:
    attempts: list[tuple[str, bool]]
    weakest_accepted: str | None = None
    inconclusive: bool = False


@dataclass
class RuntimeTrace:
    extension_id: str
    route_id: str                         # "create" or "import"
    events: list[RuntimeEvent] = field(default_factory=list)
    sensitive_corpus: SensitiveCorpus = field(default_factory=SensitiveCorpus)
    completed: bool = False
    failure_reason: str | None = None

    def of_kind(self, kind: str) -> list[RuntimeEvent]:
        return [e for e in self.events if e.kind == kind]

    def probe_result(self) -> PasswordProbeResult | None:
        """Password-probe outcome recorded in the action log, if any."""
        for event in self.events:
            if event.kind == "action_log" and \
                    event.payload.get("action") == "password_probe":
                p = event.payload
                return PasswordProbeResult(
                    attempts=[(a, bool(ok)) for a, ok in p.get("attempts", [])],
                    weakest_accepted=p.get("weakest_accepted"),
                    inconclusive=bool(p.get("inconclusive", False)))
        return None


def save_trace(trace: RuntimeTrace, path: str | Path) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "kind": "trace_meta", "version": TRACE_FORMAT_VERSION,
            "extension_id": trace.extension_id, "route_id": trace.route_id,
        }) + "\n")
        for event in trace.events:
            fh.write(json.dumps(event.to_json(), ensure_ascii=False) + "\n")
        fh.write(json.dumps({
            "kind": "trace_end", "completed": trace.completed,
            "failure_reason": trace.failure_reason,
            "sensitive_corpus": trace.sensitive_corpus.to_json(),
        }, ensure_ascii=False) + "\n")


def load_trace(path: str | Path) -> RuntimeTrace:
    trace = RuntimeTrace(extension_id="", route_id="")
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            kind = record.get("kind")
            if kind == "trace_meta":
                trace.extension_id = record.get("extension_id", "")
                trace.route_id = record.get("route_id", "")
            elif kind == "trace_end":
                trace.completed = bool(record.get("completed"))
                trace.failure_reason = record.get("failure_reason")
                trace.sensitive_corpus = SensitiveCorpus.from_json(
                    record.get("sensitive_corpus", {}))
            elif kind in EVENT_KINDS:
                trace.events.append(RuntimeEvent(
                    event_id=int(record.get("event_id", len(trace.events))),
                    timestamp=float(record.get("timestamp", 0.0)),
                    kind=kind, payload=record.get("payload", {})))
            else:
                raise ValueError(f"unknown trace record kind {kind!r}")
    return trace
