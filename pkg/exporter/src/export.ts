/**
 * Export orchestration: encode the dataset under the shared schema, train
 * the requested model on it, explain every row in order, and write the
 * engine's importance CSV (row_id column, header equal to the encoded
 * feature names) plus a .meta.json sidecar with the exporter-side column
 * means for round-trip verification.
 */

import * as fs from "node:fs";

import { writeCsv } from "./csv.js";
import { EncodedDataset, encodeDataset } from "./encode.js";
import { RandomForest } from "./forest.js";
import { columnStats, explainInstance } from "./lime.js";
import { fitLogistic, ProbModel } from "./logistic.js";
import { parseSchema } from "./schema.js";
import { ShapExplainer } from "./shap.js";

export type Notion = "LIME" | "SHAP";
export type ModelKind = "random_forest" | "logistic";

export interface ExportJob {
  dataPath: string;
  schemaPath: string;
  notion: Notion;
  model: ModelKind;
  seed: number;
  outPath: string;
  limeSamples?: number;
  shapSamples?: number;
}

export function trainModel(ds: EncodedDataset, kind: ModelKind, seed: number): ProbModel {
  if (kind === "logistic") {
    return fitLogistic(ds.features, ds.labels, { seed });
  }
  return new RandomForest(ds.features, ds.labels, { seed });
}

export function computeImportance(
  ds: EncodedDataset,
  model: ProbModel,
  notion: Notion,
  seed: number,
  options: { limeSamples?: number; shapSamples?: number } = {}
): number[][] {
  const values: number[][] = [];
  if (notion === "LIME") {
    const stats = columnStats(ds.features);
    for (let i = 0; i < ds.n; i++) {
      const row = explainInstance(model, ds.features[i], stats, {
        numSamples: options.limeSamples ?? 1000,
        seed: seed + 31 * i,
      });
      if (row.some((v) => !Number.isFinite(v))) {
        throw new Error(`explainer failure on row ${i}: non-finite attribution`);
      }
      values.push(row);
    }
    return values;
  }
  const explainer = new ShapExplainer(model, ds.features, {
    numSamples: options.shapSamples ?? 2048,
    seed,
  });
  for (let i = 0; i < ds.n; i++) {
    const row = explainer.explainInstance(ds.features[i], i);
    if (row.some((v) => !Number.isFinite(v))) {
      throw new Error(`explainer failure on row ${i}: non-finite attribution`);
    }
    values.push(row);
  }
  return values;
}

export function runExport(job: ExportJob): void {
  const csvText = fs.readFileSync(job.dataPath, "utf-8");
  const schema = parseSchema(fs.readFileSync(job.schemaPath, "utf-8"));
  const ds = encodeDataset(csvText, schema);
  const model = trainModel(ds, job.model, job.seed);
  const values = computeImportance(ds, model, job.notion, job.seed, {
    limeSamples: job.limeSamples,
    shapSamples: job.shapSamples,
  });

  const rows: (string | number)[][] = [["row_id", ...ds.featureNames]];
  for (let i = 0; i < ds.n; i++) {
    rows.push([i, ...values[i].map((v) => String(v))]);
  }
  fs.writeFileSync(job.outPath, writeCsv(rows));

  const means = ds.featureNames.map(
    (_, j) => values.reduce((acc, row) => acc + row[j], 0) / ds.n
  );
  const meta = {
    notion: job.notion,
    model: job.model,
    seed: job.seed,
    rows: ds.n,
    features: ds.featureNames,
    column_means: means,
  };
  fs.writeFileSync(job.outPath + ".meta.json", JSON.stringify(meta, null, 2) + "\n");
}
