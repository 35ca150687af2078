"""Dynamic navigation of a live wallet and runtime data collection.

One Harness drives one browser session through a navigation route:
observe the page, classify it against the semantics database, run the
matching page script, and poll runtime state (storage, HTML, captured
crypto parameters, profile files) once a second between steps. Every
interaction and snapshot lands in a RuntimeTrace; route failures are
recorded in the trace rather than raised.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from .detectors import load_wordlist, mnemonic_runs
from .instrument import InstrumentedBundle
from .semantics import (PageClassification, PageObservation, SemanticsDb,
                        classify_page, observe_html)
from .trace import PasswordProbeResult, RuntimeEvent, RuntimeTrace, SensitiveCorpus
from .webdriver import (NoSuchElement, WebDriverError, WebDriverUnreachable,
                        open_wire_session)

DEFAULT_PASSWORD_LADDER = ["123", "123456", "abcdef", "12345678",
                           "abc12345", "Weasdxz@a142"]
DEFAULT_MNEMONIC = ["abandon", "ability", "able", "about", "above", "absent",
                    "absorb", "abstract", "absurd", "abuse", "access",
                    "accident"]

_HEX64_RE = re.compile(r"\b[0-9a-fA-F]{64}\b")

ADVANCE_WORDS = ["continue", "next", "ok", "got it", "i agree", "agree",
                 "accept", "proceed", "done", "confirm", "submit", "finish"]

_ERROR_MARKERS = ("error", "invalid", "incorrect", "too short", "weak",
                  "must be", "at least", "mismatch", "wrong")


class HarnessError(Exception):
    pass


class ExtensionLoadFailed(HarnessError):
    pass


class StartPageNotFound(HarnessError):
    pass


class SessionLost(HarnessError):
    pass


class ElementGone(HarnessError):
    pass


class NoAdvanceControl(HarnessError):
    pass


class ProbeInconclusive(HarnessError):
    pass


@dataclass
class HarnessConfig:
    webdriver_url: str = ""
    browser_profile_dir: str = ""
    per_page_timeout_s: float = 30.0
    route_timeout_s: float = 180.0
    poll_interval_ms: int = 1000
    password_ladder: list[str] = field(
        default_factory=lambda: list(DEFAULT_PASSWORD_LADDER))
    mnemonic_words: list[str] = field(
        default_factory=lambda: list(DEFAULT_MNEMONIC))
    headless: bool = True
    rng_seed: int = 7

    def __post_init__(self):
        if self.poll_interval_ms < 250:
            raise ValueError("poll_interval_ms must be >= 250")
        if len(self.mnemonic_words) not in (12, 15, 24):
            raise ValueError("mnemonic_words must hold 12, 15, or 24 words")


@dataclass
class Stage:
    page_ids: tuple[str, ...]
    action: str
    optional: bool = False
    positional: bool = False
    terminal: bool = False


@dataclass
class NavigationRoute:
    route_id: str
    expected_sequence: list[Stage]


def create_route() -> NavigationRoute:
    return NavigationRoute("create", [
        Stage(("start",), "advance", optional=True),
        Stage(("wallet_creation_preparations",), "choose_create", optional=True),
        Stage(("password_setting",), "password_setting"),
        Stage(("mnemonic_display",), "capture_mnemonic", terminal=True),
    ])


def import_route() -> NavigationRoute:
    return NavigationRoute("import", [
        Stage(("start",), "advance", optional=True),
        Stage(("wallet_creation_preparations",), "choose_import", optional=True),
        Stage(("import_method_selection",), "choose_mnemonic_method",
              optional=True),
        Stage(("mnemonic_import", "wallet_setup"), "import_secret"),
        Stage(("password_setting",), "password_setting", optional=True),
        Stage(("home",), "lock"),
        Stage(("wallet_unlock",), "unlock"),
        Stage(("home",), "open_settings"),
        Stage((), "open_backup", positional=True),
        Stage((), "password_verification", positional=True),
        # backup pages share the display page's semantics, so accept both
        Stage(("mnemonic_display",), "backup_terminal", positional=True,
              terminal=True),
    ])


@dataclass
class ActionOutcome:
    advanced: bool
    description: str


@dataclass
class Session:
    """A live wallet session: wire connection plus bundle bookkeeping."""
    wire: object
    extension_id: str
    bundle: InstrumentedBundle | None
    agent_source: str
    start_url: str


# ------------------------------------------------------------ session open

def _id_from_manifest_key(key_b64: str) -> str:
    import base64
    digest = hashlib.sha256(base64.b64decode(key_b64)).digest()[:16]
    return "".join(chr(ord("a") + (b >> 4)) + chr(ord("a") + (b & 15))
                   for b in digest)


def _id_from_profile(profile_dir: str, bundle_path: Path) -> str | None:
    for prefs_name in ("Default/Preferences", "Preferences",
                       "Default/Secure Preferences", "Secure Preferences"):
        prefs_path = Path(profile_dir) / prefs_name
        if not prefs_path.is_file():
            continue
        try:
            prefs = json.loads(prefs_path.read_text(encoding="utf-8",
                                                    errors="replace"))
        except json.JSONDecodeError:
            continue
        settings = (prefs.get("extensions") or {}).get("settings") or {}
        for ext_id, entry in settings.items():
            if str(entry.get("path", "")).rstrip("/") == str(bundle_path).rstrip("/"):
                return ext_id
    return None


def _start_page(bundle_dir: Path) -> str:
    manifest = json.loads((bundle_dir / "manifest.json").read_text(
        encoding="utf-8-sig"))
    for key in ("action", "browser_action", "page_action"):
        entry = manifest.get(key)
        if isinstance(entry, dict) and entry.get("default_popup"):
            return str(entry["default_popup"]).lstrip("/")
    candidates = sorted(p.relative_to(bundle_dir).as_posix()
                        for p in bundle_dir.rglob("*.html"))
    for preferred in ("index.html", "popup.html", "home.html", "start.html"):
        if preferred in candidates:
            return preferred
    if candidates:
        return candidates[0]
    raise StartPageNotFound(f"no HTML page in {bundle_dir}")


def open_session(cfg: HarnessConfig, bundle: InstrumentedBundle) -> Session:
    """Launch the browser with the bundle loaded and the start page open."""
    bundle_dir = Path(bundle.out_path).resolve()
    if not bundle_dir.is_dir():
        raise ExtensionLoadFailed(f"bundle directory missing: {bundle_dir}")
    try:
        start_page = _start_page(bundle_dir)
    except (OSError, json.JSONDecodeError) as exc:
        raise ExtensionLoadFailed(f"unloadable bundle manifest: {exc}") from exc
    wire = open_wire_session(
        cfg.webdriver_url, extension_dir=str(bundle_dir),
        profile_dir=cfg.browser_profile_dir or None, headless=cfg.headless)
    try:
        try:
            manifest = json.loads((bundle_dir / "manifest.json").read_text(
                encoding="utf-8-sig"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ExtensionLoadFailed(f"bad manifest: {exc}") from exc
        ext_id = None
        if manifest.get("key"):
            ext_id = _id_from_manifest_key(manifest["key"])
        if ext_id is None and cfg.browser_profile_dir:
            deadline = time.time() + 10
            while ext_id is None and time.time() < deadline:
                ext_id = _id_from_profile(cfg.browser_profile_dir, bundle_dir)
                if ext_id is None:
                    time.sleep(0.5)
        if ext_id is None:
            raise ExtensionLoadFailed(
                "could not resolve extension id (no manifest key and no "
                "profile preferences entry)")
        agent_source = ""
        for rel in bundle.agent_paths:
            agent_source += (bundle_dir / rel).read_text(encoding="utf-8") + "\n"
        start_url = f"chrome-extension://{ext_id}/{start_page}"
        wire.get(start_url)
        if not (wire.page_source() or "").strip():
            raise StartPageNotFound(f"start page empty: {start_url}")
        return Session(wire=wire, extension_id=ext_id, bundle=bundle,
                       agent_source=agent_source, start_url=start_url)
    except HarnessError:
        wire.quit()
        raise
    except WebDriverError as exc:
        wire.quit()
        raise ExtensionLoadFailed(str(exc)) from exc


# ----------------------------------------------------------------- harness

_TAG_SCRIPT = """
var all = document.querySelectorAll('input, textarea, button, select, a');
for (var i = 0; i < all.length; i++) {
    all[i].setAttribute('data-wr-idx', String(i));
}
return all.length;
"""

_SNAPSHOT_SCRIPT = "return typeof __wr_snapshot === 'function' ? __wr_snapshot() : null;"
_DRAIN_SCRIPT = "return typeof __wr_drain === 'function' ? __wr_drain() : [];"
_AGENT_CHECK = "return typeof __wr_snapshot === 'function';"


class Harness:
    """Route execution and runtime collection for one session."""

    def __init__(self, cfg: HarnessConfig, session: Session, db: SemanticsDb,
                 wordlist: frozenset[str] | None = None,
                 time_fn=time.time, sleep_fn=time.sleep):
        self.cfg = cfg
        self.session = session
        self.db = db
        self.wordlist = wordlist or load_wordlist()
        self.time = time_fn
        self.sleep = sleep_fn
        self.rng = random.Random(cfg.rng_seed)
        self._event_id = 0
        self._last_storage_hash: str | None = None
        self._last_html_hash: str | None = None
        self._last_poll_time: float | None = None
        self._last_profile_scan = self.time()
        self._probe_done = False
        self.trace: RuntimeTrace | None = None

    # ---- event plumbing

    def _emit(self, kind: str, payload: dict) -> RuntimeEvent:
        event = RuntimeEvent(event_id=self._event_id, timestamp=self.time(),
                             kind=kind, payload=payload)
        self._event_id += 1
        assert self.trace is not None
        self.trace.events.append(event)
        return event

    def _log(self, action: str, **detail) -> None:
        self._emit("action_log", {"action": action, **detail})

    # ---- observation

    def observe(self) -> PageObservation:
        wire = self.session.wire
        try:
            html = wire.page_source()
            url = wire.current_url()
        except WebDriverUnreachable:
            raise SessionLost("browser session lost during observation")
        return observe_html(html, url=url, timestamp=self.time())

    def _ensure_agent(self) -> bool:
        wire = self.session.wire
        try:
            if wire.execute_script(_AGENT_CHECK):
                return True
            if self.session.agent_source:
                wire.execute_script(self.session.agent_source)
                return bool(wire.execute_script(_AGENT_CHECK))
        except WebDriverError:
            return False
        return False

    # ---- runtime polling

    def poll_runtime(self) -> list[RuntimeEvent]:
        """Snapshot storage and page state; change-gated, 1 Hz cadence."""
        wire = self.session.wire
        emitted: list[RuntimeEvent] = []
        self._last_poll_time = self.time()
        agent_ok = self._ensure_agent()
        if not agent_ok:
            self._log("agent_unavailable")
            return emitted
        try:
            snapshot = wire.execute_script(_SNAPSHOT_SCRIPT)
        except WebDriverUnreachable:
            raise SessionLost("browser session lost during poll")
        except WebDriverError as exc:
            self._log("snapshot_error", message=str(exc))
            return emitted
        if isinstance(snapshot, dict):
            storage = {key: snapshot.get(key) or {}
                       for key in ("localStorage", "sessionStorage", "indexedDB")}
            storage_hash = hashlib.sha256(json.dumps(
                storage, sort_keys=True, default=str).encode()).hexdigest()
            if storage_hash != self._last_storage_hash:
                self._last_storage_hash = storage_hash
                emitted.append(self._emit("storage_snapshot", storage))
            html = str(snapshot.get("html", ""))
            html_hash = hashlib.sha256(html.encode()).hexdigest()
            if html and html_hash != self._last_html_hash:
                self._last_html_hash = html_hash
                emitted.append(self._emit("html_snapshot", {"html": html}))
        try:
            records = wire.execute_script(_DRAIN_SCRIPT) or []
        except WebDriverError:
            records = []
        for record in records:
            if isinstance(record, dict):
                emitted.append(self._emit("param_capture", {
                    "plan_id": record.get("plan_id", ""),
                    "bindings": record.get("bindings", {}),
                    "agent_timestamp": record.get("timestamp"),
                }))
                for value in (record.get("bindings") or {}).values():
                    text = str(value)
                    corpus = self.trace.sensitive_corpus
                    if len(text) >= 4 and \
                            text not in corpus.intermediate_crypto_values:
                        corpus.intermediate_crypto_values.append(text)
        emitted.extend(self._scan_profile())
        return emitted

    def _scan_profile(self) -> list[RuntimeEvent]:
        profile = self.cfg.browser_profile_dir
        if not profile or not Path(profile).is_dir():
            return []
        corpus = self.trace.sensitive_corpus
        needles: list[tuple[str, str]] = []
        if corpus.password_used:
            needles.append(("password", corpus.password_used))
        if corpus.mnemonic_words:
            needles.append(("mnemonic", corpus.mnemonic_phrase))
        for i, key in enumerate(corpus.private_keys_observed):
            needles.append((f"private_key[{i}]", key))
        if not needles:
            return []
        since = self._last_profile_scan
        self._last_profile_scan = self.time()
        emitted = []
        for file in Path(profile).rglob("*"):
            try:
                if not file.is_file() or file.stat().st_size > 32 * 1024 * 1024:
                    continue
                if file.stat().st_mtime < since - 1.0:
                    continue
                data = file.read_bytes()
            except OSError:
                continue
            matched = []
            for label, value in needles:
                raw = value.encode("utf-8")
                wide = value.encode("utf-16-le")
                if raw in data or wide in data:
                    matched.append({"label": label, "value": value})
            if matched:
                emitted.append(self._emit("profile_scan", {
                    "path": str(file), "matched": matched}))
        return emitted

    # ---- element interaction

    def _tag_elements(self, obs: PageObservation) -> bool:
        try:
            count = self.session.wire.execute_script(_TAG_SCRIPT)
        except WebDriverError:
            return False
        return count == len(obs.elements)

    def _locator(self, index: int) -> str:
        return f"[data-wr-idx='{index}']"

    def _click_index(self, index: int) -> None:
        try:
            self.session.wire.click(self._locator(index))
        except NoSuchElement as exc:
            raise ElementGone(str(exc)) from exc

    def _fill_index(self, index: int, text: str, credential: str | None = None,
                    label: str = "") -> None:
        try:
            self.session.wire.fill(self._locator(index), text)
        except NoSuchElement as exc:
            raise ElementGone(str(exc)) from exc
        self._log("fill", field=label or f"element[{index}]", value=text,
                  credential=credential or "")

    def _clickable_indexes(self, obs: PageObservation,
                           words: list[str]) -> list[int]:
        found = []
        for i, element in enumerate(obs.elements):
            is_button = element.tag in ("button", "a") or (
                element.tag == "input" and element.type in ("button", "submit"))
            if not is_button:
                continue
            label = element.label.lower()
            if any(w in label for w in words):
                found.append(i)
        return found

    def _click_labeled(self, obs: PageObservation, words: list[str]) -> bool:
        indexes = self._clickable_indexes(obs, words)
        if not indexes:
            return False
        if not self._tag_elements(obs):
            obs = self.observe()
            if not self._tag_elements(obs):
                raise ElementGone("page mutated during tagging")
            indexes = self._clickable_indexes(obs, words)
            if not indexes:
                return False
        self._click_index(indexes[0])
        self._log("click", label=obs.elements[indexes[0]].label.strip(),
                  index=indexes[0])
        return True

    def _check_checkboxes(self, obs: PageObservation) -> int:
        done = 0
        for i, element in enumerate(obs.elements):
            if element.tag == "input" and element.type == "checkbox" \
                    and not element.checked:
                if done == 0 and not self._tag_elements(obs):
                    return 0
                self._click_index(i)
                done += 1
        if done:
            self._log("checkboxes", count=done)
        return done

    def _password_indexes(self, obs: PageObservation) -> list[int]:
        return [i for i, e in enumerate(obs.elements)
                if e.tag == "input" and e.type == "password"]

    def _generic_advance(self, obs: PageObservation) -> bool:
        self._check_checkboxes(obs)
        obs = self.observe()
        if self._click_labeled(obs, ADVANCE_WORDS):
            return True
        # single-button pages advance through their only control
        buttons = [i for i, e in enumerate(obs.elements)
                   if e.tag == "button" or
                   (e.tag == "input" and e.type in ("button", "submit"))]
        if len(buttons) == 1 and self._tag_elements(obs):
            self._click_index(buttons[0])
            self._log("click", label=obs.elements[buttons[0]].label.strip(),
                      index=buttons[0])
            return True
        return False

    # ---- password probing

    def probe_password_policy(self, ladder: list[str] | None = None,
                              ) -> PasswordProbeResult:
        """Try candidates weakest-first; record the first acceptance.

        Acceptance = navigation/page change, or the password inputs
        disappearing, or no error-marker element within the settle
        window. Inconclusive when the whole ladder passes without any
        distinguishable accept/reject signal.
        """
        ladder = ladder if ladder is not None else self.cfg.password_ladder
        attempts: list[tuple[str, bool]] = []
        weakest: str | None = None
        any_error_seen = False
        for candidate in ladder:
            obs = self.observe()
            pw_indexes = self._password_indexes(obs)
            if not pw_indexes:
                break
            if not self._tag_elements(obs):
                continue
            for index in pw_indexes:
                self._fill_index(index, candidate, credential="password_probe",
                                 label=obs.elements[index].label)
            before_url = obs.url
            if not self._click_labeled(obs, ADVANCE_WORDS + ["create", "set",
                                                             "save", "unlock"]):
                raise NoAdvanceControl("no way to submit the password form")
            accepted, error_seen = self._settle_acceptance(before_url)
            any_error_seen = any_error_seen or error_seen
            attempts.append((candidate, accepted))
            self._log("password_attempt", candidate=candidate,
                      accepted=accepted)
            if accepted:
                weakest = candidate
                break
            # the next attempt's fill() clears the rejected value; an
            # explicit clear here would race page re-renders
        inconclusive = weakest is None and not any_error_seen and bool(attempts)
        result = PasswordProbeResult(attempts=attempts,
                                     weakest_accepted=weakest,
                                     inconclusive=inconclusive)
        self._log("password_probe",
                  attempts=[[c, ok] for c, ok in attempts],
                  weakest_accepted=weakest, inconclusive=inconclusive)
        return result

    def _settle_acceptance(self, before_url: str) -> tuple[bool, bool]:
        """(accepted, error_seen) after an attempt, by the three-signal rule:
        navigation, input disappearance, or no error marker in 2 s."""
        deadline = self.time() + 2.0
        while True:
            obs = self.observe()
            if obs.url != before_url:
                return True, False
            if not self._password_indexes(obs):
                return True, False
            text = " ".join(obs.visible_text)
            if any(marker in text for marker in _ERROR_MARKERS):
                return False, True
            if self.time() >= deadline:
                return True, False
            self.sleep(0.25)

    # ---- page scripts

    def act_on_page(self, classification: PageClassification,
                    stage: Stage) -> ActionOutcome:
        obs = self.observe()
        handler = getattr(self, f"_act_{stage.action}")
        try:
            return handler(obs, classification)
        except ElementGone:
            obs = self.observe()  # re-observe and retry once
            return handler(obs, classification)

    def _act_advance(self, obs, cls) -> ActionOutcome:
        ok = self._generic_advance(obs)
        return ActionOutcome(ok, "advance")

    def _act_choose_create(self, obs, cls) -> ActionOutcome:
        ok = self._click_labeled(obs, ["create a new", "create new", "create"])
        return ActionOutcome(ok, "choose create")

    def _act_choose_import(self, obs, cls) -> ActionOutcome:
        ok = self._click_labeled(obs, ["import", "restore", "existing"])
        return ActionOutcome(ok, "choose import")

    def _act_choose_mnemonic_method(self, obs, cls) -> ActionOutcome:
        ok = self._click_labeled(obs, ["recovery phrase", "mnemonic",
                                       "seed phrase", "phrase"])
        return ActionOutcome(ok, "choose mnemonic import")

    def _act_password_setting(self, obs, cls) -> ActionOutcome:
        corpus = self.trace.sensitive_corpus
        if not self._probe_done:
            self._probe_done = True
            probe = self.probe_password_policy()
            if probe.weakest_accepted is not None:
                corpus.password_used = probe.weakest_accepted
                return ActionOutcome(True, "password accepted during probe")
        obs = self.observe()
        pw_indexes = self._password_indexes(obs)
        if not pw_indexes:
            return ActionOutcome(True, "password form already passed")
        if not self._tag_elements(obs):
            raise ElementGone("password page mutated")
        strong = self.cfg.password_ladder[-1]
        for index in pw_indexes:
            self._fill_index(index, strong, credential="password",
                             label=obs.elements[index].label)
        corpus.password_used = strong
        self._fill_random_fields(obs, skip=set(pw_indexes))
        self._check_checkboxes(self.observe())
        obs = self.observe()
        ok = self._click_labeled(obs, ["create", "set", "save"] + ADVANCE_WORDS)
        return ActionOutcome(ok, "password set")

    def _act_capture_mnemonic(self, obs, cls) -> ActionOutcome:
        words = self._read_mnemonic(obs)
        corpus = self.trace.sensitive_corpus
        if words:
            corpus.mnemonic_words = words
        keys = _HEX64_RE.findall(" ".join(
            [e.value for e in obs.elements if e.value] + [obs.text()]))
        for key in keys:
            if key not in corpus.private_keys_observed:
                corpus.private_keys_observed.append(key)
        self._log("mnemonic_captured", words=len(words), keys=len(keys))
        return ActionOutcome(bool(words or keys), "mnemonic display reached")

    def _read_mnemonic(self, obs: PageObservation) -> list[str]:
        for element in obs.elements:
            if element.tag == "textarea" and element.value:
                tokens = element.value.lower().split()
                if len(tokens) >= 12 and all(t in self.wordlist for t in tokens[:12]):
                    return tokens
        values = [e.value.lower() for e in obs.elements
                  if e.tag == "input" and e.value]
        if len(values) >= 12 and all(v in self.wordlist for v in values[:12]):
            return values if len(values) in (12, 15, 24) else values[:12]
        runs = mnemonic_runs(obs.text(), self.wordlist)
        if runs:
            return runs[0].split()
        return []

    def _mnemonic_input_run(self, obs: PageObservation) -> list[int]:
        run: list[int] = []
        best: list[int] = []
        for i, element in enumerate(obs.elements):
            if element.tag == "input" and element.type in ("text", "password", ""):
                run.append(i)
                if len(run) > len(best):
                    best = list(run)
            else:
                run = []
        return best if len(best) >= 12 else []

    def _act_import_secret(self, obs, cls) -> ActionOutcome:
        corpus = self.trace.sensitive_corpus
        words = self.cfg.mnemonic_words
        boxes = self._mnemonic_input_run(obs)
        if not self._tag_elements(obs):
            raise ElementGone("import page mutated")
        if boxes:
            for word, index in zip(words, boxes):
                self._fill_index(index, word, credential="mnemonic",
                                 label=f"word {boxes.index(index) + 1}")
        else:
            areas = [i for i, e in enumerate(obs.elements) if e.tag == "textarea"]
            if not areas:
                return ActionOutcome(False, "no mnemonic entry field")
            self._fill_index(areas[0], " ".join(words), credential="mnemonic",
                             label="mnemonic textarea")
        corpus.mnemonic_words = list(words)
        if cls.page_id == "wallet_setup":
            pw_indexes = self._password_indexes(self.observe())
            if pw_indexes and not self._probe_done:
                self._probe_done = True
                probe = self.probe_password_policy()
                if probe.weakest_accepted is not None:
                    corpus.password_used = probe.weakest_accepted
                    return ActionOutcome(True, "setup finished during probe")
            obs = self.observe()
            pw_indexes = self._password_indexes(obs)
            if pw_indexes and self._tag_elements(obs):
                strong = self.cfg.password_ladder[-1]
                for index in pw_indexes:
                    self._fill_index(index, strong, credential="password",
                                     label=obs.elements[index].label)
                corpus.password_used = strong
        obs = self.observe()
        self._fill_random_fields(obs)
        self._check_checkboxes(self.observe())
        obs = self.observe()
        ok = self._click_labeled(obs, ["import", "restore", "confirm"]
                                 + ADVANCE_WORDS)
        return ActionOutcome(ok, "secret imported")

    def _fill_random_fields(self, obs: PageObservation,
                            skip: set[int] | None = None) -> None:
        """Unrecognized labeled text fields get random strings."""
        skip = skip or set()
        known = ("password", "mnemonic", "phrase", "seed", "word", "key")
        for i, element in enumerate(obs.elements):
            if i in skip or element.tag != "input" or \
                    element.type not in ("text", ""):
                continue
            label = element.label.lower()
            if element.value or any(k in label for k in known):
                continue
            if not label:
                continue
            value = "wr" + "".join(self.rng.choice("abcdefghjkmnpqrstuvwxyz23456789")
                                   for _ in range(8))
            if self._tag_elements(obs):
                self._fill_index(i, value, label=element.label)

    def _act_lock(self, obs, cls) -> ActionOutcome:
        ok = self._click_labeled(obs, ["lock", "log out", "logout", "sign out"])
        return ActionOutcome(ok, "lock wallet")

    def _act_unlock(self, obs, cls) -> ActionOutcome:
        pw_indexes = self._password_indexes(obs)
        if not pw_indexes:
            return ActionOutcome(False, "no unlock field")
        if not self._tag_elements(obs):
            raise ElementGone("unlock page mutated")
        password = self.trace.sensitive_corpus.password_used or \
            self.cfg.password_ladder[-1]
        for index in pw_indexes:
            self._fill_index(index, password, credential="password",
                             label=obs.elements[index].label)
        obs = self.observe()
        ok = self._click_labeled(obs, ["unlock", "login", "log in", "sign in"]
                                 + ADVANCE_WORDS)
        return ActionOutcome(ok, "unlock")

    def _act_open_settings(self, obs, cls) -> ActionOutcome:
        ok = self._click_labeled(obs, ["settings", "setting", "menu", "manage"])
        return ActionOutcome(ok, "open settings")

    def _act_open_backup(self, obs, cls) -> ActionOutcome:
        ok = self._click_labeled(obs, ["backup", "back up", "reveal", "show",
                                       "export", "secret", "recovery"])
        return ActionOutcome(ok, "open backup")

    def _act_password_verification(self, obs, cls) -> ActionOutcome:
        pw_indexes = self._password_indexes(obs)
        if not pw_indexes:
            return ActionOutcome(False, "no verification field")
        if not self._tag_elements(obs):
            raise ElementGone("verification page mutated")
        password = self.trace.sensitive_corpus.password_used or \
            self.cfg.password_ladder[-1]
        for index in pw_indexes:
            self._fill_index(index, password, credential="password",
                             label=obs.elements[index].label)
        obs = self.observe()
        ok = self._click_labeled(obs, ["verify", "confirm", "show", "reveal"]
                                 + ADVANCE_WORDS)
        return ActionOutcome(ok, "verify password")

    def _act_backup_terminal(self, obs, cls) -> ActionOutcome:
        corpus = self.trace.sensitive_corpus
        runs = mnemonic_runs(obs.text(), self.wordlist)
        values = [e.value for e in obs.elements if e.value]
        run_in_values = self._read_mnemonic(obs)
        keys = _HEX64_RE.findall(" ".join(values + [obs.text()]))
        for key in keys:
            if key not in corpus.private_keys_observed:
                corpus.private_keys_observed.append(key)
        reached = bool(runs or run_in_values or keys)
        if reached:
            self._log("backup_reached", secrets=len(runs) + len(keys))
        return ActionOutcome(reached, "backup page")

    # ---- route driver

    def run_route(self, route: NavigationRoute) -> RuntimeTrace:
        """Drive one route to its terminal page, collecting events.

        Failures never raise: an unclassifiable page that outlives the
        per-page timeout, or an overall route timeout, marks the trace
        failed with the last observation attached.
        """
        self.trace = RuntimeTrace(extension_id=self.session.extension_id,
                                  route_id=route.route_id,
                                  sensitive_corpus=SensitiveCorpus())
        stages = route.expected_sequence
        cursor = 0
        started = self.time()
        last_progress = started
        last_page_logged: str | None = None
        while True:
            now = self.time()
            if now - started > self.cfg.route_timeout_s:
                self.trace.failure_reason = "route_timeout"
                break
            if now - last_progress > self.cfg.per_page_timeout_s:
                self.trace.failure_reason = "unknown_page"
                break
            try:
                self.poll_runtime()
                obs = self.observe()
            except SessionLost as exc:
                self.trace.failure_reason = f"session_lost: {exc}"
                break
            classification = classify_page(obs, self.db)
            if classification.page_id != last_page_logged:
                last_page_logged = classification.page_id
                self._log("page", page_id=classification.page_id, url=obs.url)
            matched = self._match_stage(stages, cursor, classification)
            if matched is None:
                try:
                    self._generic_advance(obs)
                except (ElementGone, WebDriverError):
                    pass
                self.sleep(self.cfg.poll_interval_ms / 1000.0)
                continue
            index, stage = matched
            try:
                outcome = self.act_on_page(classification, stage)
            except (ElementGone, NoAdvanceControl, WebDriverError) as exc:
                self._log("action_failed", stage=stage.action, error=str(exc))
                self.sleep(self.cfg.poll_interval_ms / 1000.0)
                continue
            if outcome.advanced:
                cursor = index + 1
                last_progress = self.time()
                if stage.terminal:
                    self.trace.completed = True
                    break
            self.sleep(self.cfg.poll_interval_ms / 1000.0)
        try:
            self.poll_runtime()  # final state
        except (SessionLost, WebDriverError):
            pass
        if not self.trace.completed and self.trace.failure_reason == "unknown_page":
            obs = None
            try:
                obs = self.observe()
            except (SessionLost, WebDriverError):
                pass
            if obs is not None:
                self._emit("html_snapshot", {
                    "html": "", "note": "last observation on failure",
                    "text": obs.text()[:2000], "url": obs.url})
        return self.trace

    def _match_stage(self, stages: list[Stage], cursor: int,
                     classification: PageClassification):
        if cursor >= len(stages):
            return None
        known = classification.known
        for k in range(cursor, len(stages)):
            stage = stages[k]
            if known and classification.page_id in stage.page_ids:
                return k, stage
            if not known and stage.positional:
                return k, stage
            if not stage.optional and not (stage.positional and known):
                break
        return None
