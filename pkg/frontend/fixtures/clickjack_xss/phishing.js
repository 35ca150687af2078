window.onload = function () {
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
