function strength(pw) {
    if (!pw) {
        return 0;
    } else if (pw.length < 8) {
        return 1;
    }
    var mixed = /[a-z]/.test(pw) && /[0-9]/.test(pw);
    return mixed ? 3 : 2;
}
