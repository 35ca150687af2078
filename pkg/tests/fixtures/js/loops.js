var total = 0;
for (var i = 0; i < items.length; i++) {
    total += items[i].value;
}
for (const k of Object.keys(map)) {
    counts[k] = (counts[k] || 0) + 1;
}
while (queue.length > 0) {
    process(queue.pop());
}
