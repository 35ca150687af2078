const banner = (name, n) => `Hello ${name}, you have ${n > 0 ? `${n} new` : "no"} alerts`;
