/*
 * Agent contract tests: ring-buffer caps, value stringification,
 * snapshot shape and non-interference, drain atomicity.
 *
 * Runs in plain node with minimal storage/document stubs installed
 * before the agent script executes.
 */

import { beforeAll, describe, expect, it } from "vitest";

class MemoryStorage {
  private map = new Map<string, string>();

  get length(): number {
    return this.map.size;
  }

  key(index: number): string | null {
    return Array.from(this.map.keys())[index] ?? null;
  }

  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }

  setItem(key: string, value: string): void {
    this.map.set(key, String(value));
  }

  removeItem(key: string): void {
    this.map.delete(key);
  }

  clear(): void {
    this.map.clear();
  }
}

type AgentGlobals = {
  __wr_buf: unknown[];
  __wr_capture: (planId: unknown, bindings: unknown) => void;
  __wr_snapshot: () => {
    localStorage: Record<string, string>;
    sessionStorage: Record<string, string>;
    indexedDB: Record<string, unknown>;
    html: string;
  };
  __wr_drain: () => Array<{
    plan_id: string;
    bindings: Record<string, string>;
    timestamp: number;
  }>;
};

const g = globalThis as unknown as AgentGlobals & Record<string, unknown>;
const local = new MemoryStorage();
const session = new MemoryStorage();

beforeAll(async () => {
  g.localStorage = local;
  g.sessionStorage = session;
  g.document = {
    documentElement: { outerHTML: "<html><body>stub</body></html>" },
  };
  // no indexedDB stub on purpose: the dump must degrade to {}
  delete g.indexedDB;
  await import("../src/agent");
});

describe("installation", () => {
  it("defines the reserved entries and nothing else leaks", () => {
    expect(Array.isArray(g.__wr_buf)).toBe(true);
    expect(typeof g.__wr_capture).toBe("function");
    expect(typeof g.__wr_snapshot).toBe("function");
    expect(typeof g.__wr_drain).toBe("function");
  });

  it("is idempotent: re-import keeps the same buffer", async () => {
    const buffer = g.__wr_buf;
    await import("../src/agent");
    expect(g.__wr_buf).toBe(buffer);
  });
});

describe("snapshot", () => {
  it("returns exactly the four contract keys, in order", () => {
    const snapshot = g.__wr_snapshot();
    expect(Object.keys(snapshot)).toEqual([
      "localStorage",
      "sessionStorage",
      "indexedDB",
      "html",
    ]);
    expect(snapshot.html).toContain("stub");
    expect(snapshot.indexedDB).toEqual({});
  });

  it("dumps storage with stable (sorted) key order", () => {
    local.setItem("zeta", "1");
    local.setItem("alpha", "2");
    const snapshot = g.__wr_snapshot();
    expect(Object.keys(snapshot.localStorage)).toEqual(["alpha", "zeta"]);
    local.clear();
  });

  it("does not write any wallet-visible storage key", () => {
    session.setItem("walletState", "x");
    const before = session.length + local.length;
    g.__wr_snapshot();
    g.__wr_capture("p", { a: 1 });
    g.__wr_drain();
    expect(session.length + local.length).toBe(before);
    session.removeItem("walletState");
  });

  it("aborts with a diagnostic on a __wr_ storage key collision", () => {
    local.setItem("__wr_evil", "1");
    expect(() => g.__wr_snapshot()).toThrowError(/__wr_ namespace collision/);
    local.removeItem("__wr_evil");
  });

  it("caps stored values at 4 KiB", () => {
    local.setItem("big", "x".repeat(10000));
    const snapshot = g.__wr_snapshot();
    expect(snapshot.localStorage.big.length).toBe(4096);
    local.clear();
  });
});

describe("capture and drain", () => {
  it("records plan id, stringified bindings, and a timestamp", () => {
    g.__wr_drain();
    g.__wr_capture("plan:1", {
      text: "verbatim",
      bytes: new Uint8Array([1, 255, 16]),
      options: { name: "PBKDF2", nested: { deep: { deeper: { lost: 1 } } } },
      count: 7,
    });
    const records = g.__wr_drain();
    expect(records).toHaveLength(1);
    const record = records[0];
    expect(record.plan_id).toBe("plan:1");
    expect(record.bindings.text).toBe("verbatim");
    expect(record.bindings.bytes).toBe("01ff10");
    expect(record.bindings.count).toBe("7");
    const options = JSON.parse(record.bindings.options);
    expect(options.name).toBe("PBKDF2");
    // depth limit: objects nested beyond three levels are pruned
    expect(options.nested.deep.deeper).toBe("[depth]");
    expect(record.timestamp).toBeGreaterThan(0);
  });

  it("caps captured string values at 4 KiB", () => {
    g.__wr_capture("plan:2", { long: "y".repeat(9999) });
    const [record] = g.__wr_drain();
    expect(record.bindings.long.length).toBe(4096);
  });

  it("drops oldest records beyond 512", () => {
    g.__wr_drain();
    for (let i = 0; i < 600; i++) {
      g.__wr_capture(`plan:${i}`, {});
    }
    expect(g.__wr_buf.length).toBe(512);
    const records = g.__wr_drain();
    expect(records[0].plan_id).toBe("plan:88");
    expect(records[records.length - 1].plan_id).toBe("plan:599");
  });

  it("drain is read-then-clear: second drain is empty", () => {
    g.__wr_capture("plan:x", {});
    const first = g.__wr_drain();
    expect(first).toHaveLength(1);
    expect(g.__wr_drain()).toEqual([]);
    expect(g.__wr_buf.length).toBe(0);
  });
});
