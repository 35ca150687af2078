/*
 * In-page capture and snapshot agent.
 *
 * Compiled to a classic script (no module syntax) so the instrumenter
 * can inject it as the first content/background script of a bundle, or
 * the harness can evaluate it over the wire. All state lives under the
 * reserved `__wr_` globals:
 *
 *   __wr_capture(planId, bindings)  append one record to the ring buffer
 *   __wr_snapshot()                 {localStorage, sessionStorage,
 *                                    indexedDB, html}
 *   __wr_drain()                    return and clear the buffer (atomic:
 *                                    single-threaded page context)
 *
 * The buffer keeps at most 512 records, oldest dropped; every captured
 * or snapshotted value is stringified with a 4 KiB cap (strings kept
 * verbatim, byte arrays hex-encoded, objects JSON-encoded at depth <= 3).
 * Snapshots never write wallet-visible state; a wallet storage key that
 * itself starts with `__wr_` aborts with a diagnostic error so the
 * session can refuse to continue on a namespace collision.
 */

interface WrCaptureRecord {
  plan_id: string;
  bindings: Record<string, string>;
  timestamp: number;
}

interface WrSnapshot {
  localStorage: Record<string, string>;
  sessionStorage: Record<string, string>;
  indexedDB: Record<string, Record<string, string[]>>;
  html: string;
}

(() => {
  const g = globalThis as Record<string, unknown>;
  if (g.__wr_buf) {
    return; // already installed on this page
  }

  const BUFFER_CAP = 512;
  const VALUE_CAP = 4096;
  const JSON_DEPTH = 3;

  const buffer: WrCaptureRecord[] = [];
  let idbCache: Record<string, Record<string, string[]>> = {};

  const cap = (text: string): string =>
    text.length > VALUE_CAP ? text.slice(0, VALUE_CAP) : text;

  const toHex = (bytes: Uint8Array): string => {
    let out = "";
    for (let i = 0; i < bytes.length && out.length < VALUE_CAP; i++) {
      out += bytes[i].toString(16).padStart(2, "0");
    }
    return cap(out);
  };

  const prune = (value: unknown, depth: number): unknown => {
    if (value === null || typeof value !== "object") {
      return value;
    }
    if (depth >= JSON_DEPTH) {
      return "[depth]";
    }
    if (Array.isArray(value)) {
      return value.slice(0, 64).map((v) => prune(v, depth + 1));
    }
    const out: Record<string, unknown> = {};
    let count = 0;
    for (const key of Object.keys(value as Record<string, unknown>)) {
      if (count++ >= 64) {
        break;
      }
      out[key] = prune((value as Record<string, unknown>)[key], depth + 1);
    }
    return out;
  };

  const stringify = (value: unknown): string => {
    if (typeof value === "string") {
      return cap(value);
    }
    if (value instanceof Uint8Array) {
      return toHex(value);
    }
    if (value instanceof ArrayBuffer) {
      return toHex(new Uint8Array(value));
    }
    if (value === undefined) {
      return "undefined";
    }
    try {
      return cap(JSON.stringify(prune(value, 0)));
    } catch (err) {
      return cap(String(value));
    }
  };

  const dumpStorage = (store: Storage | undefined): Record<string, string> => {
    const out: Record<string, string> = {};
    if (!store) {
      return out;
    }
    const keys: string[] = [];
    for (let i = 0; i < store.length; i++) {
      const key = store.key(i);
      if (key === null) {
        continue;
      }
      if (key.indexOf("__wr_") === 0) {
        throw new Error("__wr_ namespace collision on storage key: " + key);
      }
      keys.push(key);
    }
    keys.sort();
    for (const key of keys) {
      out[key] = cap(store.getItem(key) || "");
    }
    return out;
  };

  const refreshIdb = (): void => {
    const idb = g.indexedDB as IDBFactory | undefined;
    if (!idb || typeof idb.databases !== "function") {
      return;
    }
    idb
      .databases()
      .then((infos) => {
        for (const info of infos) {
          if (!info.name) {
            continue;
          }
          const request = idb.open(info.name);
          request.onsuccess = () => {
            const db = request.result;
            const dump: Record<string, string[]> = {};
            const names = Array.from(db.objectStoreNames);
            if (names.length === 0) {
              idbCache[db.name] = dump;
              db.close();
              return;
            }
            let pending = names.length;
            const tx = db.transaction(names, "readonly");
            for (const storeName of names) {
              const getAll = tx.objectStore(storeName).getAll();
              getAll.onsuccess = () => {
                dump[storeName] = (getAll.result || []).map(stringify);
                if (--pending === 0) {
                  idbCache[db.name] = dump;
                  db.close();
                }
              };
              getAll.onerror = () => {
                dump[storeName] = [];
                if (--pending === 0) {
                  idbCache[db.name] = dump;
                  db.close();
                }
              };
            }
          };
        }
      })
      .catch(() => {
        /* databases() unsupported or blocked: leave the cache as-is */
      });
  };

  g.__wr_buf = buffer;

  g.__wr_capture = (planId: unknown, bindings: unknown): void => {
    const mapped: Record<string, string> = {};
    if (bindings && typeof bindings === "object") {
      for (const key of Object.keys(bindings as Record<string, unknown>)) {
        mapped[key] = stringify((bindings as Record<string, unknown>)[key]);
      }
    }
    buffer.push({
      plan_id: String(planId),
      bindings: mapped,
      timestamp: Date.now(),
    });
    while (buffer.length > BUFFER_CAP) {
      buffer.shift();
    }
  };

  g.__wr_snapshot = (): WrSnapshot => {
    const doc = g.document as Document | undefined;
    return {
      localStorage: dumpStorage(g.localStorage as Storage | undefined),
      sessionStorage: dumpStorage(g.sessionStorage as Storage | undefined),
      indexedDB: idbCache,
      html: doc && doc.documentElement ? doc.documentElement.outerHTML : "",
    };
  };

  g.__wr_drain = (): WrCaptureRecord[] => {
    const drained = buffer.slice();
    buffer.length = 0;
    return drained;
  };

  refreshIdb();
  if (typeof g.setInterval === "function") {
    (g.setInterval as (fn: () => void, ms: number) => unknown)(refreshIdb, 1000);
  }
})();
