var tries = 0;
do {
    tries += 1;
} while (tries < 3 && !done());
