/**
 * CLI:
 *   node dist/cli.js export --data d.csv --schema s.json --notion shap \
 *       --model rf --seed 0 --out importance.csv [--samples N]
 */

import { ExportJob, runExport } from "./export.js";

function parseArgs(argv: string[]): Map<string, string> {
  const out = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith("--") || i + 1 >= argv.length) {
      throw new Error(`bad argument: ${key}`);
    }
    out.set(key.slice(2), argv[i + 1]);
  }
  return out;
}

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  if (command !== "export") {
    console.error("usage: export --data <csv> --schema <json> --notion lime|shap --model rf|logistic --seed N --out <path>");
    return 2;
  }
  let args: Map<string, string>;
  try {
    args = parseArgs(rest);
  } catch (err) {
    console.error(String(err));
    return 2;
  }
  for (const required of ["data", "schema", "notion", "out"]) {
    if (!args.has(required)) {
      console.error(`missing --${required}`);
      return 2;
    }
  }
  const notionArg = args.get("notion")!.toLowerCase();
  if (notionArg !== "lime" && notionArg !== "shap") {
    console.error(`unknown notion ${notionArg}; expected lime or shap`);
    return 2;
  }
  const modelArg = (args.get("model") ?? "rf").toLowerCase();
  if (!["rf", "random_forest", "logistic"].includes(modelArg)) {
    console.error(`unknown model ${modelArg}; expected rf or logistic`);
    return 2;
  }
  const samples = args.has("samples") ? Number(args.get("samples")) : undefined;
  const job: ExportJob = {
    dataPath: args.get("data")!,
    schemaPath: args.get("schema")!,
    notion: notionArg === "lime" ? "LIME" : "SHAP",
    model: modelArg === "logistic" ? "logistic" : "random_forest",
    seed: Number(args.get("seed") ?? "0"),
    outPath: args.get("out")!,
    limeSamples: samples,
    shapSamples: samples,
  };
  try {
    runExport(job);
  } catch (err) {
    console.error(String(err));
    return 1;
  }
  console.log(`wrote ${job.outPath}`);
  return 0;
}

const isDirectRun = process.argv[1]?.endsWith("cli.js");
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}
