var gone = delete cache.entry;
var kind = typeof vault;
var neg = -offset;
var ok = !error;
count++;
--remaining;
