function UnlockExample(x, y, z) {
    function process(temp) {
        return temp;
    }
    function unlock(a, b) {
        // The code snippet being injected to collect the parameters
        //collect();
        var c = process(a);

        function unlocklog(d) {
            console.log(d);
        }
        const decrypted = CryptoJS.AES.decrypt(c, b);
    }
}
