// Banyan Wallet wallet logic (fixture; fixed test vectors only)
var FIXED_WORDS = "legal winner thank year wave sausage worth useful legal winner thank yellow".split(" ");

function state() {
    var raw = sessionStorage.getItem("wstate");
    return raw ? JSON.parse(raw) : {};
}

function saveState(s) {
    sessionStorage.setItem("wstate", JSON.stringify(s));
}

function encodeVault(words) {
    return btoa(words.join(" ").split("").reverse().join(""));
}

function decodeVault(blob) {
    return atob(blob).split("").reverse().join("").split(" ");
}

function bytesToHex(bytes) {
    var out = "";
    for (var i = 0; i < bytes.length; i++) {
        out += (bytes[i] + 256).toString(16).substring(1);
    }
    return out;
}

function deriveCheck(pw, done) {
    var enc = new TextEncoder();
    crypto.subtle.importKey("raw", enc.encode(pw), { name: "PBKDF2" },
                            false, ["deriveBits"]).then(function (key) {
        return crypto.subtle.deriveBits({
            name: "PBKDF2",
            salt: enc.encode("demonic-salt"),
            iterations: 100000,
            hash: "SHA-256"
        }, key, 256);
    }).then(function (bits) {
        done(bytesToHex(new Uint8Array(bits)));
    });
}

function acceptPassword(pw) {
    return pw.length >= 8 && /[a-z]/i.test(pw) && /[0-9]/.test(pw);
}

function showError(msg) {
    var box = document.getElementById("pw-error");
    if (box) {
        box.textContent = msg;
    }
}

function renderSecret(words) {
    var area = document.getElementById("phrase");
    if (area) {
        area.value = words.join(" ");
        area.textContent = words.join(" ");
        sessionStorage.setItem("draft", words.join(" "));
        return;
    }
    var host = document.getElementById("phrase-boxes");
    if (host) {
        var html = "";
        for (var i = 0; i < words.length; i++) {
            html = html + "<input type=\"password\" readonly value=\"" +
                words[i] + "\">";
        }
        host.innerHTML = html;
    }
}

function currentWords() {
    var s = state();
    return s.vault ? decodeVault(s.vault) : FIXED_WORDS;
}

function initStart() {
    document.getElementById("go").addEventListener("click", function () {
        location.href = "prep.html";
    });
}

function initCollect() {
    document.getElementById("btn-cont").addEventListener("click", function () {
        if (document.getElementById("agree").checked) {
            location.href = "prep.html";
        }
    });
}

function initPrep() {
    document.getElementById("btn-create").addEventListener("click", function () {
        var s = state();
        s.mode = "create";
        saveState(s);
        location.href = "password.html";
    });
    document.getElementById("btn-import").addEventListener("click", function () {
        var s = state();
        s.mode = "import";
        saveState(s);
        location.href = "method.html";
    });
}

function initPassword() {
    document.getElementById("btn-pw").addEventListener("click", function () {
        var pw = document.getElementById("pw1").value;
        if (!acceptPassword(pw)) {
            showError("Password too weak: must be at least 8 characters " +
                      "with letters and digits");
            return;
        }
        deriveCheck(pw, function (check) {
            localStorage.setItem("kdf_check", check);
            var s = state();
            if (s.mode === "create") {
                s.vault = encodeVault(FIXED_WORDS);
                saveState(s);
                location.href = "reminder.html";
            } else {
                saveState(s);
                location.href = "home.html";
            }
        });
    });
}

function initReminder() {
    document.getElementById("btn-cont").addEventListener("click", function () {
        location.href = "display.html";
    });
}

function initDisplay() {
    renderSecret(currentWords());
}

function initMethod() {
    document.getElementById("btn-phrase").addEventListener("click", function () {
        location.href = "import.html";
    });
}

function initImport() {
    var host = document.getElementById("boxes");
    var html = "";
    for (var i = 0; i < 12; i++) {
        html = html + "<input type=\"text\" id=\"w" + i + "\">";
    }
    host.innerHTML = html;
    document.getElementById("btn-import-go").addEventListener("click",
                                                              function () {
        var words = [];
        var filled = true;
        for (var i = 0; i < 12; i++) {
            var value = document.getElementById("w" + i).value;
            if (!value) {
                filled = false;
            }
            words.push(value);
        }
        if (filled) {
            var s = state();
            s.vault = encodeVault(words);
            saveState(s);
            location.href = "password.html";
        }
    });
}

function initHome() {
    document.getElementById("btn-lock").addEventListener("click", function () {
        location.href = "unlock.html";
    });
    document.getElementById("btn-settings").addEventListener("click",
                                                             function () {
        location.href = "settings.html";
    });
}

function verifyAgainstCheck(pw, good, bad) {
    deriveCheck(pw, function (check) {
        if (check === localStorage.getItem("kdf_check")) {
            good(pw);
        } else {
            bad();
        }
    });
}

function initUnlock() {
    document.getElementById("btn-unlock").addEventListener("click",
                                                           function () {
        var pw = document.getElementById("pwu").value;
        verifyAgainstCheck(pw, function (ok) {
            
            location.href = "home.html";
        }, function () {
            showError("Incorrect password");
        });
    });
}

function initSettings() {
    document.getElementById("btn-backup").addEventListener("click",
                                                           function () {
        location.href = "verify.html";
    });
}

function initVerify() {
    document.getElementById("btn-verify").addEventListener("click",
                                                           function () {
        var pw = document.getElementById("pwv").value;
        verifyAgainstCheck(pw, function (ok) {
            location.href = "backup.html";
        }, function () {
            showError("Incorrect password");
        });
    });
}

function initBackup() {
    renderSecret(currentWords());
}

document.addEventListener("DOMContentLoaded", function () {
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
    if (pageName === "home.html") initHome();
    if (pageName === "unlock.html") initUnlock();
    if (pageName === "settings.html") initSettings();
    if (pageName === "verify.html") initVerify();
    if (pageName === "backup.html") initBackup();
});
