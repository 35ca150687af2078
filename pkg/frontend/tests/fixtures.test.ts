/*
 * Fixture corpus checks: ground-truth manifest shape, bundle sanity,
 * and agreement between corpus.json static expectations and the
 * scanner CLI (the scanner is consumed strictly through its CLI).
 */

import { execFileSync } from "node:child_process";
import { existsSync, readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

const FIXTURES = join(__dirname, "..", "fixtures");
const REPO = join(__dirname, "..", "..");

const CATEGORIES = new Set([
  "clickjacking",
  "xss",
  "defective_password_policy",
  "redundant_storage",
  "demonic",
  "defective_cryptography",
]);

interface CorpusFixture {
  name: string;
  path: string;
  extension_id: string;
  route_support: string;
  seeded: string[];
  expected_static: Record<string, number>;
  expected_full: Record<string, number>;
  notes: string;
}

const corpus = JSON.parse(
  readFileSync(join(FIXTURES, "corpus.json"), "utf-8"),
) as { version: number; fixtures: CorpusFixture[] };

function runScanner(args: string[]): { code: number; stdout: string } {
  try {
    const stdout = execFileSync(
      "python3",
      ["-m", "walletscan.cli", ...args],
      { cwd: REPO, encoding: "utf-8", timeout: 120000 },
    );
    return { code: 0, stdout };
  } catch (err) {
    const failure = err as { status?: number; stdout?: string };
    return { code: failure.status ?? -1, stdout: failure.stdout ?? "" };
  }
}

describe("corpus manifest", () => {
  it("lists seven fixtures with valid ground truth", () => {
    expect(corpus.fixtures).toHaveLength(7);
    const names = corpus.fixtures.map((f) => f.name);
    expect(new Set(names).size).toBe(7);
    for (const fixture of corpus.fixtures) {
      expect(["create", "import", "both"]).toContain(fixture.route_support);
      for (const category of [
        ...fixture.seeded,
        ...Object.keys(fixture.expected_static),
        ...Object.keys(fixture.expected_full),
      ]) {
        expect(CATEGORIES.has(category), `bad category ${category}`).toBe(true);
      }
      expect(fixture.extension_id).toMatch(/^[a-p]{32}$/);
    }
  });

  it("static expectations are a subset of full expectations", () => {
    for (const fixture of corpus.fixtures) {
      for (const [category, count] of Object.entries(
        fixture.expected_static,
      )) {
        expect(fixture.expected_full[category] ?? 0).toBeGreaterThanOrEqual(
          count,
        );
      }
    }
  });
});

describe("bundle sanity", () => {
  it("every fixture is an unpacked extension with pinned id", () => {
    for (const fixture of corpus.fixtures) {
      const dir = join(FIXTURES, fixture.path);
      const manifest = JSON.parse(
        readFileSync(join(dir, "manifest.json"), "utf-8"),
      );
      expect([2, 3]).toContain(manifest.manifest_version);
      expect(typeof manifest.key).toBe("string");
      expect(existsSync(join(dir, "start.html"))).toBe(true);
      expect(existsSync(join(dir, "wallet.js"))).toBe(true);
    }
  });

  it("fixtures stay tiny (each file under 300 lines)", () => {
    for (const fixture of corpus.fixtures) {
      const dir = join(FIXTURES, fixture.path);
      const source = readFileSync(join(dir, "wallet.js"), "utf-8");
      expect(source.split("\n").length).toBeLessThanOrEqual(300);
    }
  });
});

describe("scanner agreement (CLI surface)", () => {
  it.each(corpus.fixtures.map((f) => [f.name, f] as const))(
    "static scan of %s matches corpus ground truth",
    (_name, fixture) => {
      const result = runScanner([
        "scan",
        "--ext",
        join(FIXTURES, fixture.path),
        "--mode",
        "static",
        "--format",
        "json",
      ]);
      const expectedFindings = Object.values(fixture.expected_static).reduce(
        (a, b) => a + b,
        0,
      );
      expect(result.code).toBe(expectedFindings > 0 ? 1 : 0);
      const report = JSON.parse(result.stdout);
      const got: Record<string, number> = {};
      for (const finding of report.findings) {
        got[finding.category] = (got[finding.category] ?? 0) + 1;
      }
      expect(got).toEqual(fixture.expected_static);
      expect(report.stats.parse_failed).toBe(0);
      expect(report.stats.parse_unsupported).toBe(0);
    },
  );
});

const endpoint = process.env.WR_WEBDRIVER_URL;

describe.skipIf(!endpoint)("live end-to-end corpus", () => {
  it.each(corpus.fixtures.map((f) => [f.name, f] as const))(
    "full scan of %s matches ground truth",
    (_name, fixture) => {
      const result = runScanner([
        "scan",
        "--ext",
        join(FIXTURES, fixture.path),
        "--mode",
        "full",
        "--webdriver-url",
        endpoint as string,
        "--agent-file",
        join(__dirname, "..", "dist", "agent.js"),
        "--format",
        "json",
      ]);
      const report = JSON.parse(result.stdout);
      const got: Record<string, number> = {};
      for (const finding of report.findings) {
        got[finding.category] = (got[finding.category] ?? 0) + 1;
      }
      expect(got).toEqual(fixture.expected_full);
      expect(report.stats.routes_completed).toBe(2);
    },
    240000,
  );
});
