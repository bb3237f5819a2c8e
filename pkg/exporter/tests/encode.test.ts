import * as fs from "node:fs";
import * as path from "node:path";
import { describe, expect, it } from "vitest";

import { encodeDataset } from "../src/encode.js";
import { parseSchema } from "../src/schema.js";
import { parseCsv, writeCsv } from "../src/csv.js";

const goldenDir = path.join(__dirname, "..", "golden");

function loadGolden() {
  const csvText = fs.readFileSync(path.join(goldenDir, "golden_data.csv"), "utf-8");
  const schema = parseSchema(
    fs.readFileSync(path.join(goldenDir, "golden_schema.json"), "utf-8")
  );
  const expected = JSON.parse(
    fs.readFileSync(path.join(goldenDir, "golden_encoded.json"), "utf-8")
  );
  return { csvText, schema, expected };
}

describe("encoding golden fixture (shared with the audit engine)", () => {
  it("reproduces the engine's encoded feature names", () => {
    const { csvText, schema, expected } = loadGolden();
    const ds = encodeDataset(csvText, schema);
    expect(ds.featureNames).toEqual(expected.feature_names);
  });

  it("reproduces the engine's encoded matrix and labels exactly", () => {
    const { csvText, schema, expected } = loadGolden();
    const ds = encodeDataset(csvText, schema);
    expect(ds.n).toBe(expected.feature_matrix.length);
    for (let i = 0; i < ds.n; i++) {
      for (let j = 0; j < ds.d; j++) {
        expect(ds.features[i][j]).toBeCloseTo(expected.feature_matrix[i][j], 12);
      }
      expect(ds.labels[i]).toBe(expected.labels[i]);
    }
  });

  it("one-hot rows sum to one per categorical column", () => {
    const { csvText, schema } = loadGolden();
    const ds = encodeDataset(csvText, schema);
    const raceCols = ds.featureNames
      .map((name, j) => ({ name, j }))
      .filter(({ name }) => name.startsWith("race="));
    for (const row of ds.features) {
      const total = raceCols.reduce((acc, { j }) => acc + row[j], 0);
      expect(total).toBe(1);
    }
  });

  it("rejects a schema column missing from the file", () => {
    const { csvText } = loadGolden();
    const schema = parseSchema(
      JSON.stringify([
        { name: "nope", kind: "numeric", sensitive: true },
        { name: "y", kind: "binary", target: true },
      ])
    );
    expect(() => encodeDataset(csvText, schema)).toThrow(/missing/);
  });
});

describe("csv", () => {
  it("round-trips quoted fields", () => {
    const rows = [
      ["name", "note"],
      ["a,b", 'say "hi"'],
      ["plain", "line\nbreak"],
    ];
    const text = writeCsv(rows);
    expect(parseCsv(text)).toEqual(rows);
  });

  it("parses decimal points regardless of width", () => {
    const parsed = parseCsv("a,b\n1.5,2\n-0.25,1e-3\n");
    expect(Number(parsed[1][0])).toBeCloseTo(1.5);
    expect(Number(parsed[2][1])).toBeCloseTo(0.001);
  });
});
