window.onload = function() {
    if ("/warn.html" === window.location.pathname) {
        const {hostname: e} = parseParams();
        document.getElementById("dbLink").innerHTML = '<a href="https://db.example/' + e + '">' + e + "</a>"
    }
}

function parseParams() {
    const raw = window.location.hash.substring(1);
    return qs.parse(raw)
}
