/**
 * Dataset encoding, mirroring the audit engine's rules exactly:
 * sensitive columns first then safe columns (each in schema order), one-hot
 * expansion of categoricals with lexicographically sorted levels named
 * "<col>=<level>", target excluded. The exported header must equal the
 * engine's encoded feature-name list for the same schema; a golden fixture
 * pins this agreement.
 */

import { parseCsv } from "./csv.js";
import { ColumnSchema } from "./schema.js";

export interface EncodedDataset {
  /** n x d feature matrix (no bias column). */
  features: number[][];
  featureNames: string[];
  labels: number[];
  n: number;
  d: number;
}

export function encodeDataset(csvText: string, schema: ColumnSchema[]): EncodedDataset {
  const rows = parseCsv(csvText);
  if (rows.length === 0) throw new Error("empty data file");
  const header = rows[0].map((h) => h.trim());
  const dataRows = rows.slice(1);
  if (dataRows.length === 0) throw new Error("no data rows");

  const positions = new Map<string, number>();
  for (const col of schema) {
    const pos = header.indexOf(col.name);
    if (pos < 0) throw new Error(`column ${col.name} missing from file header`);
    positions.set(col.name, pos);
  }

  const parseNumeric = (raw: string, col: ColumnSchema, rowIdx: number): number => {
    const value = Number(raw);
    if (!Number.isFinite(value)) {
      throw new Error(`row ${rowIdx}: cannot parse ${JSON.stringify(raw)} as ${col.kind} for ${col.name}`);
    }
    if (col.kind === "binary" && value !== 0 && value !== 1) {
      throw new Error(`row ${rowIdx}: binary column ${col.name} holds ${raw}`);
    }
    return value;
  };

  const target = schema.find((c) => c.target)!;
  const labels = dataRows.map((row, i) =>
    parseNumeric(row[positions.get(target.name)!].trim(), target, i)
  );

  const ordered = [
    ...schema.filter((c) => c.sensitive && !c.target),
    ...schema.filter((c) => !c.sensitive && !c.target),
  ];

  const featureNames: string[] = [];
  const columns: number[][] = [];
  for (const col of ordered) {
    const pos = positions.get(col.name)!;
    if (col.kind === "categorical") {
      const values = dataRows.map((row) => row[pos].trim());
      const levels = [...new Set(values)].sort();
      for (const level of levels) {
        featureNames.push(`${col.name}=${level}`);
        columns.push(values.map((v) => (v === level ? 1 : 0)));
      }
    } else {
      featureNames.push(col.name);
      columns.push(dataRows.map((row, i) => parseNumeric(row[pos].trim(), col, i)));
    }
  }

  const n = dataRows.length;
  const d = featureNames.length;
  const features: number[][] = Array.from({ length: n }, (_, i) =>
    columns.map((col) => col[i])
  );
  return { features, featureNames, labels, n, d };
}
