const { address, balance = 0 } = account;
const [first, ...rest] = history;
function show({ label, value }) {
    return label + ": " + value;
}
