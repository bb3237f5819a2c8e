import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { parseCsv } from "../src/csv.js";
import { runExport } from "../src/export.js";
import { Prng } from "../src/prng.js";

let workDir: string;

function writeFixture(n = 100, seed = 0) {
  const rng = new Prng(seed);
  const lines = ["group,flag,x1,x2,y"];
  for (let i = 0; i < n; i++) {
    const group = ["a", "b", "c"][rng.int(3)];
    const flag = rng.int(2);
    const x1 = rng.normal();
    const x2 = rng.normal();
    const logit = 1.5 * x1 - x2 + (group === "a" ? 1 : 0);
    const y = rng.next() < 1 / (1 + Math.exp(-logit)) ? 1 : 0;
    lines.push([group, flag, x1, x2, y].join(","));
  }
  const dataPath = path.join(workDir, "fixture.csv");
  fs.writeFileSync(dataPath, lines.join("\n") + "\n");
  const schemaPath = path.join(workDir, "fixture.schema.json");
  fs.writeFileSync(
    schemaPath,
    JSON.stringify([
      { name: "group", kind: "categorical", sensitive: true },
      { name: "flag", kind: "binary", sensitive: true },
      { name: "x1", kind: "numeric" },
      { name: "x2", kind: "numeric" },
      { name: "y", kind: "binary", target: true },
    ])
  );
  return { dataPath, schemaPath };
}

beforeAll(() => {
  workDir = fs.mkdtempSync(path.join(os.tmpdir(), "exporter-test-"));
});

afterAll(() => {
  fs.rmSync(workDir, { recursive: true, force: true });
});

describe("export end to end", () => {
  const expectedHeader = ["row_id", "group=a", "group=b", "group=c", "flag", "x1", "x2"];

  it("writes an aligned SHAP file with meta sidecar", () => {
    const { dataPath, schemaPath } = writeFixture();
    const outPath = path.join(workDir, "shap.csv");
    runExport({
      dataPath,
      schemaPath,
      notion: "SHAP",
      model: "random_forest",
      seed: 0,
      outPath,
    });
    const rows = parseCsv(fs.readFileSync(outPath, "utf-8"));
    expect(rows[0]).toEqual(expectedHeader);
    expect(rows.length).toBe(101);
    for (let i = 1; i < rows.length; i++) {
      expect(Number(rows[i][0])).toBe(i - 1); // row_id runs 0..n-1 in order
      for (const cell of rows[i].slice(1)) {
        expect(Number.isFinite(Number(cell))).toBe(true);
      }
    }
    const meta = JSON.parse(fs.readFileSync(outPath + ".meta.json", "utf-8"));
    expect(meta.rows).toBe(100);
    expect(meta.features).toEqual(expectedHeader.slice(1));
    // self-consistency: means recomputed from the file match the sidecar
    for (let j = 0; j < meta.features.length; j++) {
      let total = 0;
      for (let i = 1; i < rows.length; i++) total += Number(rows[i][j + 1]);
      expect(total / 100).toBeCloseTo(meta.column_means[j], 9);
    }
  });

  it("writes a LIME file deterministically per seed", () => {
    const { dataPath, schemaPath } = writeFixture();
    const out1 = path.join(workDir, "lime1.csv");
    const out2 = path.join(workDir, "lime2.csv");
    for (const outPath of [out1, out2]) {
      runExport({
        dataPath,
        schemaPath,
        notion: "LIME",
        model: "logistic",
        seed: 7,
        outPath,
        limeSamples: 300,
      });
    }
    expect(fs.readFileSync(out1, "utf-8")).toBe(fs.readFileSync(out2, "utf-8"));
  });

  it("aborts with the row index when an explainer fails", async () => {
    const { computeImportance } = await import("../src/export.js");
    const { encodeDataset } = await import("../src/encode.js");
    const { parseSchema } = await import("../src/schema.js");
    const { dataPath, schemaPath } = writeFixture(10);
    const ds = encodeDataset(
      fs.readFileSync(dataPath, "utf-8"),
      parseSchema(fs.readFileSync(schemaPath, "utf-8"))
    );
    const brokenModel = { predictProba: (rows: number[][]) => rows.map(() => NaN) };
    expect(() => computeImportance(ds, brokenModel, "SHAP", 0)).toThrow(/row 0/);
  });

  it("changes output when the seed changes", () => {
    const { dataPath, schemaPath } = writeFixture();
    const out1 = path.join(workDir, "s1.csv");
    const out2 = path.join(workDir, "s2.csv");
    runExport({ dataPath, schemaPath, notion: "LIME", model: "logistic", seed: 1, outPath: out1, limeSamples: 200 });
    runExport({ dataPath, schemaPath, notion: "LIME", model: "logistic", seed: 2, outPath: out2, limeSamples: 200 });
    expect(fs.readFileSync(out1, "utf-8")).not.toBe(fs.readFileSync(out2, "utf-8"));
  });
});
