#!/usr/bin/env python3
"""Regenerate the fixture wallet corpus under frontend/fixtures/.

Each fixture is a tiny multi-page extension following the same lifecycle
(start, setup, create/import, home, unlock, settings, verify, backup)
with exactly one behavior knob turned per seeded vulnerability. Run from
anywhere; writes relative to this file. The generated files are checked
in; rerun only when changing fixture behavior.
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"
KEYS = json.loads((Path(__file__).parent / "fixture_keys.json").read_text())

MNEMONIC_FIXED = ("legal winner thank year wave sausage worth useful "
                  "legal winner thank yellow")


def page(title: str, body: str, fixture: str) -> str:
    return (f"<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
            f"<title>{title}</title>\n</head>\n<body>\n{body}\n"
            f"<script src=\"wallet.js\"></script>\n</body>\n</html>\n")


def pages(fx: dict) -> dict[str, str]:
    name = fx["title"]
    secret_markup = (
        "<textarea id=\"phrase\" rows=\"3\" cols=\"40\"></textarea>"
        if fx.get("textarea_mnemonic") else
        "<div id=\"phrase-boxes\"></div>")
    home_page = fx.get("home_page", "home.html")
    out = {
        "start.html": page(name, f"""
<h1>Welcome to {name}</h1>
<p>Get started below.</p>
<button id="go">Get started</button>""", fx["name"]),
        "prep.html": page(name, """
<h1>Set up your wallet</h1>
<button id="btn-create">Create a new wallet</button>
<button id="btn-import">Import an existing wallet</button>""", fx["name"]),
        "password.html": page(name, """
<h2>Create a password</h2>
<p>Enter a new password and confirm it.</p>
<input type="password" id="pw1" placeholder="Password">
<input type="password" id="pw2" placeholder="Confirm password">
<div id="pw-error"></div>
<button id="btn-pw">Continue</button>""", fx["name"]),
        "reminder.html": page(name, """
<h2>Stay safe</h2>
<p>Never share your credentials with anyone.</p>
<button id="btn-cont">Continue</button>""", fx["name"]),
        "display.html": page(name, f"""
<h2>Your recovery phrase</h2>
<p>Write down these words and keep them safe.</p>
{secret_markup}""", fx["name"]),
        "method.html": page(name, """
<h2>Restore your wallet</h2>
<p>Select an import method: recovery phrase or private key.</p>
<button id="btn-phrase">Recovery phrase</button>""", fx["name"]),
        "import.html": page(name, """
<h2>Import wallet</h2>
<p>Enter your recovery phrase words in order.</p>
<div id="boxes"></div>
<button id="btn-import-go">Import</button>""", fx["name"]),
        home_page: page(name, """
<h2>Account</h2>
<p>Balance: 0 ETH</p>
<button id="btn-send">Send</button>
<button id="btn-receive">Receive</button>
<button id="btn-lock">Lock</button>
<button id="btn-settings">Settings</button>""", fx["name"]),
        "unlock.html": page(name, """
<h2>Welcome back</h2>
<p>Unlock your wallet.</p>
<input type="password" id="pwu" placeholder="Password">
<div id="pw-error"></div>
<button id="btn-unlock">Unlock</button>""", fx["name"]),
        "settings.html": page(name, """
<h2>Preferences</h2>
<p>Manage preferences and data here.</p>
<button id="btn-backup">Backup wallet</button>""", fx["name"]),
        "verify.html": page(name, """
<h2>Identity check</h2>
<p>Type your passcode to reveal the backup.</p>
<input type="password" id="pwv" placeholder="Passcode">
<div id="pw-error"></div>
<button id="btn-verify">Reveal</button>""", fx["name"]),
        "backup.html": page(name, f"""
<h2>Your recovery phrase</h2>
<p>Copy it somewhere safe.</p>
{secret_markup}""", fx["name"]),
    }
    if fx.get("collect_page"):
        out["collect.html"] = page(name, """
<h2>Before we begin</h2>
<p>We gather anonymous usage metrics. Review our privacy policy.</p>
<input type="checkbox" id="agree">
<label for="agree">I have read the policy</label>
<button id="btn-cont">Continue</button>""", fx["name"])
    return out


def wallet_js(fx: dict) -> str:
    accept = fx["accept_password_js"]
    iterations = fx.get("kdf_iterations", 100000)
    start_after = "collect.html" if fx.get("collect_page") else "prep.html"
    home_page = fx.get("home_page", "home.html")
    store_plain = ("localStorage.setItem(\"session_auth\", pw);"
                   if fx.get("plaintext_password") else "")
    mirror = ("sessionStorage.setItem(\"draft\", words.join(\" \"));"
              if fx.get("textarea_mnemonic") else "")
    return f"""// {fx['title']} wallet logic (fixture; fixed test vectors only)
var FIXED_WORDS = "{MNEMONIC_FIXED}".split(" ");

function state() {{
    var raw = sessionStorage.getItem("wstate");
    return raw ? JSON.parse(raw) : {{}};
}}

function saveState(s) {{
    sessionStorage.setItem("wstate", JSON.stringify(s));
}}

function encodeVault(words) {{
    return btoa(words.join(" ").split("").reverse().join(""));
}}

function decodeVault(blob) {{
    return atob(blob).split("").reverse().join("").split(" ");
}}

function bytesToHex(bytes) {{
    var out = "";
    for (var i = 0; i < bytes.length; i++) {{
        out += (bytes[i] + 256).toString(16).substring(1);
    }}
    return out;
}}

function deriveCheck(pw, done) {{
    var enc = new TextEncoder();
    crypto.subtle.importKey("raw", enc.encode(pw), {{ name: "PBKDF2" }},
                            false, ["deriveBits"]).then(function (key) {{
        return crypto.subtle.deriveBits({{
            name: "PBKDF2",
            salt: enc.encode("{fx['name']}-salt"),
            iterations: {iterations},
            hash: "SHA-256"
        }}, key, 256);
    }}).then(function (bits) {{
        done(bytesToHex(new Uint8Array(bits)));
    }});
}}

function acceptPassword(pw) {{
    return {accept};
}}

function showError(msg) {{
    var box = document.getElementById("pw-error");
    if (box) {{
        box.textContent = msg;
    }}
}}

function renderSecret(words) {{
    var area = document.getElementById("phrase");
    if (area) {{
        area.value = words.join(" ");
        area.textContent = words.join(" ");
        {mirror}
        return;
    }}
    var host = document.getElementById("phrase-boxes");
    if (host) {{
        var html = "";
        for (var i = 0; i < words.length; i++) {{
            html = html + "<input type=\\"password\\" readonly value=\\"" +
                words[i] + "\\">";
        }}
        host.innerHTML = html;
    }}
}}

function currentWords() {{
    var s = state();
    return s.vault ? decodeVault(s.vault) : FIXED_WORDS;
}}

function initStart() {{
    document.getElementById("go").addEventListener("click", function () {{
        location.href = "{start_after}";
    }});
}}

function initCollect() {{
    document.getElementById("btn-cont").addEventListener("click", function () {{
        if (document.getElementById("agree").checked) {{
            location.href = "prep.html";
        }}
    }});
}}

function initPrep() {{
    document.getElementById("btn-create").addEventListener("click", function () {{
        var s = state();
        s.mode = "create";
        saveState(s);
        location.href = "password.html";
    }});
    document.getElementById("btn-import").addEventListener("click", function () {{
        var s = state();
        s.mode = "import";
        saveState(s);
        location.href = "method.html";
    }});
}}

function initPassword() {{
    document.getElementById("btn-pw").addEventListener("click", function () {{
        var pw = document.getElementById("pw1").value;
        if (!acceptPassword(pw)) {{
            showError("Password too weak: must be at least 8 characters " +
                      "with letters and digits");
            return;
        }}
        deriveCheck(pw, function (check) {{
            localStorage.setItem("kdf_check", check);
            var s = state();
            if (s.mode === "create") {{
                s.vault = encodeVault(FIXED_WORDS);
                saveState(s);
                location.href = "reminder.html";
            }} else {{
                saveState(s);
                location.href = "{home_page}";
            }}
        }});
    }});
}}

function initReminder() {{
    document.getElementById("btn-cont").addEventListener("click", function () {{
        location.href = "display.html";
    }});
}}

function initDisplay() {{
    renderSecret(currentWords());
}}

function initMethod() {{
    document.getElementById("btn-phrase").addEventListener("click", function () {{
        location.href = "import.html";
    }});
}}

function initImport() {{
    var host = document.getElementById("boxes");
    var html = "";
    for (var i = 0; i < 12; i++) {{
        html = html + "<input type=\\"text\\" id=\\"w" + i + "\\">";
    }}
    host.innerHTML = html;
    document.getElementById("btn-import-go").addEventListener("click",
                                                              function () {{
        var words = [];
        var filled = true;
        for (var i = 0; i < 12; i++) {{
            var value = document.getElementById("w" + i).value;
            if (!value) {{
                filled = false;
            }}
            words.push(value);
        }}
        if (filled) {{
            var s = state();
            s.vault = encodeVault(words);
            saveState(s);
            location.href = "password.html";
        }}
    }});
}}

function initHome() {{
    document.getElementById("btn-lock").addEventListener("click", function () {{
        location.href = "unlock.html";
    }});
    document.getElementById("btn-settings").addEventListener("click",
                                                             function () {{
        location.href = "settings.html";
    }});
}}

function verifyAgainstCheck(pw, good, bad) {{
    deriveCheck(pw, function (check) {{
        if (check === localStorage.getItem("kdf_check")) {{
            good(pw);
        }} else {{
            bad();
        }}
    }});
}}

function initUnlock() {{
    document.getElementById("btn-unlock").addEventListener("click",
                                                           function () {{
        var pw = document.getElementById("pwu").value;
        verifyAgainstCheck(pw, function (ok) {{
            {store_plain}
            location.href = "{home_page}";
        }}, function () {{
            showError("Incorrect password");
        }});
    }});
}}

function initSettings() {{
    document.getElementById("btn-backup").addEventListener("click",
                                                           function () {{
        location.href = "verify.html";
    }});
}}

function initVerify() {{
    document.getElementById("btn-verify").addEventListener("click",
                                                           function () {{
        var pw = document.getElementById("pwv").value;
        verifyAgainstCheck(pw, function (ok) {{
            location.href = "backup.html";
        }}, function () {{
            showError("Incorrect password");
        }});
    }});
}}

function initBackup() {{
    renderSecret(currentWords());
}}

document.addEventListener("DOMContentLoaded", function () {{
    var path = location.pathname;
    var pageName = path.substring(path.lastIndexOf("/") + 1);
    if (pageName === "start.html") initStart();
    if (pageName === "collect.html") initCollect();
    if (pageName === "prep.html") initPrep();
    if (pageName === "password.html") initPassword();
    if (pageName === "reminder.html") initReminder();
    if (pageName === "display.html") initDisplay();
    if (pageName === "method.html") initMethod();
    if (pageName === "import.html") initImport();
    if (pageName === "{home_page}") initHome();
    if (pageName === "unlock.html") initUnlock();
    if (pageName === "settings.html") initSettings();
    if (pageName === "verify.html") initVerify();
    if (pageName === "backup.html") initBackup();
}});
"""


PHISHING_JS = """window.onload = function () {
    if ("/phishing.html" === window.location.pathname.substring(
            window.location.pathname.lastIndexOf("/"))) {
        var params = h();
        var site = params.hostname;
        document.getElementById("dbLink").innerHTML =
            '<b>Reported scam domain: <a href="https://scamdb.example/' +
            site + '">' + site + "</a></b>";
    }
};

function h() {
    var raw = window.location.hash.substring(1);
    return qs.parse(raw);
}
"""

PHISHING_HTML = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>Warning</title>
</head>
<body>
<h1>Warning</h1>
<p>The site you tried to visit was flagged as dangerous.</p>
<div id="dbLink"></div>
<script src="phishing.js"></script>
</body>
</html>
"""


def manifest(fx: dict) -> dict:
    version = fx.get("manifest_version", 3)
    data: dict = {
        "manifest_version": version,
        "name": fx["title"],
        "version": "1.0.0",
        "description": fx["description"],
        "key": KEYS[fx["name"]]["key"],
    }
    if version == 3:
        data["action"] = {"default_popup": "start.html"}
    else:
        data["browser_action"] = {"default_popup": "start.html"}
        data["content_security_policy"] = \
            "script-src 'self'; object-src 'self'"
    if fx.get("war"):
        data["web_accessible_resources"] = (
            fx["war"] if version == 2 else
            [{"resources": fx["war"], "matches": ["<all_urls>"]}])
    return data


FIXTURES = [
    {
        "name": "clean", "title": "Aster Wallet",
        "description": "well-behaved fixture: no seeded vulnerabilities",
        "accept_password_js":
            "pw.length >= 8 && /[a-z]/i.test(pw) && /[0-9]/.test(pw)",
    },
    {
        "name": "demonic", "title": "Banyan Wallet",
        "description": "seeds textarea secret display plus draft persistence",
        "accept_password_js":
            "pw.length >= 8 && /[a-z]/i.test(pw) && /[0-9]/.test(pw)",
        "textarea_mnemonic": True,
    },
    {
        "name": "redundant", "title": "Cedar Wallet",
        "description": "seeds plaintext password persistence on unlock",
        "accept_password_js":
            "pw.length >= 8 && /[a-z]/i.test(pw) && /[0-9]/.test(pw)",
        "plaintext_password": True,
    },
    {
        "name": "weak_password", "title": "Dogwood Wallet",
        "description": "seeds an accept-anything password policy",
        "accept_password_js": "pw.length > 0",
    },
    {
        "name": "clickjack_xss", "title": "Elm Wallet",
        "description": "seeds web-accessible wallet pages and a DOM sink",
        "accept_password_js":
            "pw.length >= 8 && /[a-z]/i.test(pw) && /[0-9]/.test(pw)",
        "manifest_version": 2,
        "home_page": "wallet.html",
        "war": ["phishing.html", "wallet.html"],
        "extra_files": {"phishing.html": PHISHING_HTML,
                        "phishing.js": PHISHING_JS},
    },
    {
        "name": "weak_crypto", "title": "Fir Wallet",
        "description": "seeds a 5000-iteration key derivation",
        "accept_password_js":
            "pw.length >= 8 && /[a-z]/i.test(pw) && /[0-9]/.test(pw)",
        "kdf_iterations": 5000,
    },
    {
        "name": "full_flow", "title": "Ginkgo Wallet",
        "description": "no seeded vulnerabilities; exercises all 13 pages",
        "accept_password_js":
            "pw.length >= 8 && /[a-z]/i.test(pw) && /[0-9]/.test(pw)",
        "collect_page": True,
    },
]

EXPECTED = {
    "clean": {"static": {}, "full": {}},
    "demonic": {"static": {},
                "full": {"demonic": 1, "redundant_storage": 1}},
    "redundant": {"static": {}, "full": {"redundant_storage": 1}},
    "weak_password": {"static": {},
                      "full": {"defective_password_policy": 1}},
    "clickjack_xss": {"static": {"clickjacking": 2, "xss": 1},
                      "full": {"clickjacking": 2, "xss": 1}},
    "weak_crypto": {"static": {"defective_cryptography": 1},
                    "full": {"defective_cryptography": 1}},
    "full_flow": {"static": {}, "full": {}},
}


def build() -> None:
    corpus = []
    for fx in FIXTURES:
        target = ROOT / fx["name"]
        target.mkdir(parents=True, exist_ok=True)
        for old in target.rglob("*"):
            if old.is_file():
                old.unlink()
        (target / "manifest.json").write_text(
            json.dumps(manifest(fx), indent=2) + "\n")
        (target / "wallet.js").write_text(wallet_js(fx))
        for rel, text in pages(fx).items():
            (target / rel).write_text(text)
        for rel, text in fx.get("extra_files", {}).items():
            (target / rel).write_text(text)
        corpus.append({
            "name": fx["name"],
            "path": fx["name"],
            "extension_id": KEYS[fx["name"]]["id"],
            "route_support": "both",
            "seeded": sorted(EXPECTED[fx["name"]]["full"]),
            "expected_static": EXPECTED[fx["name"]]["static"],
            "expected_full": EXPECTED[fx["name"]]["full"],
            "notes": fx["description"],
        })
    (ROOT / "corpus.json").write_text(json.dumps({
        "version": 1,
        "mnemonic_fixed": MNEMONIC_FIXED,
        "fixtures": corpus,
    }, indent=2) + "\n")
    print(f"built {len(FIXTURES)} fixtures under {ROOT}")


if __name__ == "__main__":
    build()
