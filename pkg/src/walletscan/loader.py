"""Extension bundle loading: unpack, manifest parsing, source normalization.

Accepts an unpacked directory, a .zip, or a .crx (the CRX header is
stripped and the payload treated as zip). Every JavaScript file in the
bundle is loaded and normalized; unparseable scripts are carried as
opaque text with a note instead of failing the scan.
"""

from __future__ import annotations

import fnmatch
import hashlib
import json
import posixpath
import struct
import tempfile
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

from . import jsast


class LoaderError(Exception):
    pass


class MissingManifest(LoaderError):
    pass


class MalformedArchive(LoaderError):
    pass


class UnresolvedScriptRef(LoaderError):
    pass


class InvalidJson(LoaderError):
    pass


class UnsupportedManifestVersion(LoaderError):
    pass


@dataclass
class Manifest:
    version: int
    background: list[str]
    action_page: str | None
    content_scripts: list[dict]
    war: list[str]
    csp: str | None
    raw: dict

    @property
    def name(self) -> str:
        return str(self.raw.get("name", ""))


@dataclass
class ScriptFile:
    path: str
    raw_source: str
    normalized_source: str
    sha256: str
    normalization_note: str | None = None


@dataclass
class HtmlPage:
    path: str
    raw_text: str


@dataclass
class EntryPoints:
    background_scripts: list[str]
    action_page: str | None
    content_scripts: list[str]
    war_html: list[str]


@dataclass
class ExtensionPackage:
    root_path: Path
    manifest: Manifest
    scripts: list[ScriptFile]
    html_pages: list[HtmlPage]
    assets: list[str]
    entry_points: EntryPoints
    notes: list[str] = field(default_factory=list)

    def script(self, path: str) -> ScriptFile | None:
        for s in self.scripts:
            if s.path == path:
                return s
        return None


@dataclass
class NormalizationResult:
    text: str
    note: str | None = None


def normalize_source(raw: str) -> NormalizationResult:
    """Canonical pretty-print with constant string-concat folding.

    Total: input that does not parse is passed through untouched with a
    NormalizationSkipped note. Idempotent by construction (the canonical
    form reparses to the same tree).
    """
    try:
        root = jsast.parse_script(raw)
    except jsast.ParseError as exc:
        return NormalizationResult(raw, f"NormalizationSkipped: {exc}")
    except jsast.ParseUnsupported as exc:
        return NormalizationResult(raw, f"NormalizationSkipped: {exc}")
    folded = jsast.fold_string_concats(root)
    return NormalizationResult(jsast.print_canonical(folded))


def parse_manifest(raw: str) -> Manifest:
    """Parse manifest.json text into the unified manifest shape."""
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InvalidJson(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidJson("manifest must be a JSON object")
    version = data.get("manifest_version")
    if version not in (2, 3):
        raise UnsupportedManifestVersion(
            f"manifest_version must be 2 or 3, got {version!r}")

    background: list[str] = []
    bg = data.get("background", {})
    if isinstance(bg, dict):
        background.extend(str(s) for s in bg.get("scripts", []) or [])
        if bg.get("page"):
            background.append(str(bg["page"]))
        if bg.get("service_worker"):
            background.append(str(bg["service_worker"]))

    action_page = None
    for key in ("action", "browser_action", "page_action"):
        entry = data.get(key)
        if isinstance(entry, dict) and entry.get("default_popup"):
            action_page = str(entry["default_popup"])
            break

    content_scripts = []
    for cs in data.get("content_scripts", []) or []:
        if isinstance(cs, dict):
            content_scripts.append({
                "matches": [str(m) for m in cs.get("matches", [])],
                "js": [str(j) for j in cs.get("js", [])],
            })

    war: list[str] = []
    for entry in data.get("web_accessible_resources", []) or []:
        if isinstance(entry, str):          # v2: bare pattern
            war.append(entry)
        elif isinstance(entry, dict):       # v3: (resources, matches) pairs
            war.extend(str(r) for r in entry.get("resources", []))

    csp = None
    csp_raw = data.get("content_security_policy")
    if isinstance(csp_raw, str):
        csp = csp_raw
    elif isinstance(csp_raw, dict):
        csp = csp_raw.get("extension_pages")

    return Manifest(version=version, background=background,
                    action_page=action_page, content_scripts=content_scripts,
                    war=war, csp=csp, raw=data)


def _normalize_rel(path: str) -> str:
    """Bundle-relative path with no '..' escapes; raises on escape."""
    clean = posixpath.normpath(path.replace("\\", "/").lstrip("/"))
    if clean.startswith("..") or clean == ".":
        raise MalformedArchive(f"path escapes bundle root: {path!r}")
    return clean


def _crx_payload(data: bytes) -> bytes:
    if data[:4] != b"Cr24":
        raise MalformedArchive("not a CRX container (bad magic)")
    version = struct.unpack("<I", data[4:8])[0]
    if version == 2:
        pub_len, sig_len = struct.unpack("<II", data[8:16])
        return data[16 + pub_len + sig_len:]
    if version == 3:
        header_len = struct.unpack("<I", data[8:12])[0]
        return data[12 + header_len:]
    raise MalformedArchive(f"unsupported CRX version {version}")


def _unpack(path: Path) -> Path:
    if path.is_dir():
        return path
    if not path.exists():
        raise MalformedArchive(f"no such bundle: {path}")
    data = path.read_bytes()
    if path.suffix.lower() == ".crx":
        data = _crx_payload(data)
    out = Path(tempfile.mkdtemp(prefix="walletscan-ext-"))
    try:
        with zipfile.ZipFile(_BytesReader(data)) as zf:
            for info in zf.infolist():
                rel = _normalize_rel(info.filename)
                if info.is_dir():
                    continue
                dest = out / rel
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_bytes(zf.read(info))
    except zipfile.BadZipFile as exc:
        raise MalformedArchive(f"bad archive: {exc}") from exc
    return out


class _BytesReader:
    """Seekable reader over bytes for ZipFile."""

    def __init__(self, data: bytes):
        import io
        self._buf = io.BytesIO(data)

    def __getattr__(self, name):
        return getattr(self._buf, name)


def _is_remote(ref: str) -> bool:
    return ref.startswith(("http://", "https://", "//"))


def load_extension(path: str | Path) -> ExtensionPackage:
    """Load and index an extension bundle from a directory or archive."""
    root = _unpack(Path(path))
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise MissingManifest(f"no manifest.json at bundle root {root}")
    manifest = parse_manifest(manifest_path.read_text(encoding="utf-8-sig"))

    notes: list[str] = []
    scripts: list[ScriptFile] = []
    html_pages: list[HtmlPage] = []
    assets: list[str] = []
    all_files = sorted(p for p in root.rglob("*") if p.is_file())
    known: set[str] = set()
    for file in all_files:
        rel = file.relative_to(root).as_posix()
        known.add(rel)
        if rel == "manifest.json":
            continue
        suffix = file.suffix.lower()
        if suffix == ".js":
            raw = file.read_text(encoding="utf-8", errors="replace")
            norm = normalize_source(raw)
            if norm.note:
                notes.append(f"{rel}: {norm.note}")
            scripts.append(ScriptFile(
                path=rel, raw_source=raw, normalized_source=norm.text,
                sha256=hashlib.sha256(raw.encode("utf-8")).hexdigest(),
                normalization_note=norm.note))
        elif suffix in (".html", ".htm"):
            html_pages.append(HtmlPage(
                path=rel, raw_text=file.read_text(encoding="utf-8",
                                                  errors="replace")))
        else:
            assets.append(rel)

    referenced = [r for r in manifest.background if r.endswith(".js")]
    for cs in manifest.content_scripts:
        referenced.extend(cs["js"])
    for ref in referenced:
        if _is_remote(ref):
            raise UnresolvedScriptRef(
                f"manifest references a remote script: {ref!r}")
        if _normalize_rel(ref) not in known:
            raise UnresolvedScriptRef(
                f"manifest references a missing script: {ref!r}")

    html_paths = [p.path for p in html_pages]
    war_html = sorted({
        page for pattern in manifest.war for page in html_paths
        if fnmatch.fnmatchcase(page, pattern.lstrip("/"))
    })
    entry_points = EntryPoints(
        background_scripts=[_normalize_rel(r) for r in manifest.background
                            if r.endswith(".js")],
        action_page=_normalize_rel(manifest.action_page)
        if manifest.action_page else None,
        content_scripts=sorted({_normalize_rel(j)
                                for cs in manifest.content_scripts
                                for j in cs["js"]}),
        war_html=war_html,
    )
    for listed in ([entry_points.action_page] if entry_points.action_page else []):
        if listed not in known:
            notes.append(f"action page not present in bundle: {listed}")

    return ExtensionPackage(
        root_path=root, manifest=manifest, scripts=scripts,
        html_pages=html_pages, assets=assets, entry_points=entry_points,
        notes=notes)
