/**
 * Column schema contract shared with the audit engine.
 */

export type ColumnKind = "numeric" | "binary" | "categorical";

export interface ColumnSchema {
  name: string;
  kind: ColumnKind;
  sensitive: boolean;
  target: boolean;
}

export function parseSchema(json: string): ColumnSchema[] {
  const raw = JSON.parse(json);
  if (!Array.isArray(raw)) {
    throw new Error("schema JSON must be a list of column descriptors");
  }
  const schema: ColumnSchema[] = raw.map((entry: Record<string, unknown>) => {
    if (typeof entry.name !== "string" || typeof entry.kind !== "string") {
      throw new Error(`bad schema entry: ${JSON.stringify(entry)}`);
    }
    if (!["numeric", "binary", "categorical"].includes(entry.kind)) {
      throw new Error(`column ${entry.name}: unknown kind ${entry.kind}`);
    }
    return {
      name: entry.name,
      kind: entry.kind as ColumnKind,
      sensitive: Boolean(entry.sensitive),
      target: Boolean(entry.target),
    };
  });
  const targets = schema.filter((c) => c.target);
  if (targets.length !== 1) {
    throw new Error(`schema must declare exactly one target column, got ${targets.length}`);
  }
  if (!schema.some((c) => c.sensitive && !c.target)) {
    throw new Error("schema must declare at least one sensitive column");
  }
  return schema;
}
