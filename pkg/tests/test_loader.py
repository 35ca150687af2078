"""Bundle loading, manifest parsing, and source normalization tests."""

import json
import struct
import zipfile
from pathlib import Path

import pytest

from walletscan.loader import (
    MalformedArchive, MissingManifest, UnresolvedScriptRef,
    UnsupportedManifestVersion, InvalidJson, load_extension, normalize_source,
    parse_manifest,
)


def make_bundle(tmp_path, manifest: dict, files: dict[str, str]) -> Path:
    root = tmp_path / "ext"
    root.mkdir(parents=True, exist_ok=True)
    (root / "manifest.json").write_text(json.dumps(manifest))
    for rel, text in files.items():
        dest = root / rel
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(text)
    return root


V2_MANIFEST = {
    "manifest_version": 2, "name": "fixture", "version": "1.0",
    "background": {"scripts": ["bg.js"]},
    "web_accessible_resources": ["wallet.html", "logo.png"],
}


def test_load_minimal_v2_bundle(tmp_path):
    root = make_bundle(tmp_path, V2_MANIFEST, {"bg.js": "var a = 1;"})
    pkg = load_extension(root)
    assert pkg.manifest.version == 2
    assert len(pkg.scripts) == 1
    assert pkg.scripts[0].normalized_source == "var a = 1;\n"


def test_missing_manifest(tmp_path):
    root = tmp_path / "empty"
    root.mkdir()
    (root / "a.js").write_text("1;")
    with pytest.raises(MissingManifest):
        load_extension(root)


def test_war_html_exposed_pair(tmp_path):
    manifest = {
        "manifest_version": 2, "name": "f", "version": "1",
        "web_accessible_resources": ["phishing.html", "wallet.html"],
    }
    root = make_bundle(tmp_path, manifest, {
        "phishing.html": "<html></html>", "wallet.html": "<html></html>",
        "logo.png": "",
    })
    pkg = load_extension(root)
    assert pkg.entry_points.war_html == ["phishing.html", "wallet.html"]


def test_manifest_v2_war_flat():
    m = parse_manifest(json.dumps({
        "manifest_version": 2,
        "web_accessible_resources": ["wallet.html", "logo.png"]}))
    assert m.war == ["wallet.html", "logo.png"]


def test_manifest_v3_war_flattens():
    m = parse_manifest(json.dumps({
        "manifest_version": 3,
        "web_accessible_resources": [
            {"resources": ["a.html"], "matches": ["<all_urls>"]}]}))
    assert m.war == ["a.html"]


def test_manifest_version_transparency(tmp_path):
    """v2 and v3 manifests naming the same HTML resources agree on war_html."""
    files = {"a.html": "<html></html>", "b.html": "<html></html>"}
    v2 = make_bundle(tmp_path / "v2", {
        "manifest_version": 2, "web_accessible_resources": ["a.html", "b.html"],
    }, files)
    v3 = make_bundle(tmp_path / "v3", {
        "manifest_version": 3, "web_accessible_resources": [
            {"resources": ["a.html"], "matches": ["<all_urls>"]},
            {"resources": ["b.html"], "matches": ["<all_urls>"]},
        ]}, files)
    assert load_extension(v2).entry_points.war_html == \
        load_extension(v3).entry_points.war_html


def test_unsupported_manifest_version():
    with pytest.raises(UnsupportedManifestVersion):
        parse_manifest(json.dumps({"manifest_version": 4}))


def test_invalid_manifest_json():
    with pytest.raises(InvalidJson):
        parse_manifest("{nope")


def test_unknown_manifest_fields_preserved():
    m = parse_manifest(json.dumps({
        "manifest_version": 3, "homepage_url": "https://x.example"}))
    assert m.raw["homepage_url"] == "https://x.example"


def test_remote_script_ref_rejected(tmp_path):
    manifest = {
        "manifest_version": 2,
        "background": {"scripts": ["https://cdn.example/lib.js"]},
    }
    root = make_bundle(tmp_path, manifest, {})
    with pytest.raises(UnresolvedScriptRef):
        load_extension(root)


def test_missing_script_ref_rejected(tmp_path):
    manifest = {"manifest_version": 2, "background": {"scripts": ["gone.js"]}}
    root = make_bundle(tmp_path, manifest, {})
    with pytest.raises(UnresolvedScriptRef):
        load_extension(root)


def test_zip_bundle(tmp_path):
    archive = tmp_path / "ext.zip"
    with zipfile.ZipFile(archive, "w") as zf:
        zf.writestr("manifest.json", json.dumps(V2_MANIFEST))
        zf.writestr("bg.js", "var ok = true;")
        zf.writestr("wallet.html", "<html></html>")
    pkg = load_extension(archive)
    assert pkg.manifest.name == "fixture"
    assert pkg.scripts[0].path == "bg.js"


def test_zip_path_escape_rejected(tmp_path):
    archive = tmp_path / "evil.zip"
    with zipfile.ZipFile(archive, "w") as zf:
        zf.writestr("manifest.json", json.dumps({"manifest_version": 2}))
        zf.writestr("../escape.js", "1;")
    with pytest.raises(MalformedArchive):
        load_extension(archive)


def test_crx_container(tmp_path):
    import io
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("manifest.json", json.dumps({"manifest_version": 3,
                                                 "name": "crx"}))
    payload = buf.getvalue()
    header = b"Cr24" + struct.pack("<I", 3) + struct.pack("<I", 8) + b"\x00" * 8
    crx = tmp_path / "ext.crx"
    crx.write_bytes(header + payload)
    pkg = load_extension(crx)
    assert pkg.manifest.name == "crx"


def test_crx_bad_magic(tmp_path):
    crx = tmp_path / "bad.crx"
    crx.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(MalformedArchive):
        load_extension(crx)


def test_load_deterministic(tmp_path):
    root = make_bundle(tmp_path, V2_MANIFEST, {
        "bg.js": "var a = 'x' + 'y';", "wallet.html": "<html></html>"})
    one = load_extension(root)
    two = load_extension(root)
    assert [s.sha256 for s in one.scripts] == [s.sha256 for s in two.scripts]
    assert [s.normalized_source for s in one.scripts] == \
        [s.normalized_source for s in two.scripts]


# ---- normalize_source

def test_normalize_folds_and_formats():
    result = normalize_source('var x="A"+"ES";')
    assert result.text == 'var x = "AES";\n'
    assert result.note is None


def test_normalize_idempotent():
    once = normalize_source('function f(a){return a+1;}')
    twice = normalize_source(once.text)
    assert once.text == twice.text


def test_normalize_garbage_passthrough():
    garbage = "\x00\x01 not a script @@@"
    result = normalize_source(garbage)
    assert result.text == garbage
    assert result.note and "NormalizationSkipped" in result.note


def test_normalize_unsupported_passthrough():
    src = "switch (a) { }"
    result = normalize_source(src)
    assert result.text == src
    assert "NormalizationSkipped" in (result.note or "")


def test_unparseable_script_carried_opaque(tmp_path):
    root = make_bundle(tmp_path, V2_MANIFEST, {
        "bg.js": "var ok = 1;", "wallet.html": "<p></p>",
        "broken.js": "function ( {"})
    pkg = load_extension(root)
    broken = pkg.script("broken.js")
    assert broken is not None
    assert broken.normalized_source == "function ( {"
    assert any("NormalizationSkipped" in note for note in pkg.notes)
