function parseVault(text) {
    try {
        return JSON.parse(text);
    } catch (err) {
        console.warn("vault corrupt", err.message);
        return null;
    } finally {
        busy = false;
    }
}
