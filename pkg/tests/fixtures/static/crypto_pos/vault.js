function makeKey(e, t) {
    var o = util.utf8ToBuffer(e), i = util.base64ToBuffer(t);
    return g.crypto.subtle.importKey("raw", o, { name: "PBKDF2" }, !1, ["deriveKey"]).then((function(k) {
        return g.crypto.subtle.deriveKey({
            name: "PBKDF2",
            salt: i,
            iterations: 5e3,
            hash: "SHA-256"
        }, k, { name: "AES-GCM", length: 256 }, !1, ["encrypt", "decrypt"])
    }))
}
