import { parse } from "papaparse";

/** Columns the figures consume; anything else in the CSV is carried along. */
export const REQUIRED_COLUMNS = ["scheme", "epsilon", "ExpErr", "QLoss", "min_ExpEr"] as const;

export interface SweepRow {
  scheme: string;
  epsilon: number;
  expErr: number;
  qLoss: number;
  minExpEr: number;
}

/** Rows keyed by (scheme, epsilon), epsilon ascending within each scheme. */
export interface SweepFrame {
  schemes: string[];
  rows: Map<string, SweepRow[]>;
}

export class SchemaError extends Error {}

function toNumber(raw: unknown, column: string, line: number): number {
  const value = Number(raw);
  if (raw === undefined || raw === null || raw === "" || Number.isNaN(value)) {
    throw new SchemaError(`row ${line}: column ${column} is not numeric (${String(raw)})`);
  }
  return value;
}

/** Parse and validate a sweep CSV; throws SchemaError on a bad shape. */
export function parseSweep(csvText: string): SweepFrame {
  const parsed = parse<Record<string, string>>(csvText.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const column of REQUIRED_COLUMNS) {
    if (!fields.includes(column)) {
      throw new SchemaError(`missing column: ${column}`);
    }
  }
  if (parsed.data.length === 0) {
    throw new SchemaError("no data rows");
  }

  const rows = new Map<string, SweepRow[]>();
  const seen = new Set<string>();
  parsed.data.forEach((record, i) => {
    const line = i + 2; // 1-based, after the header
    const scheme = record.scheme;
    if (!scheme) {
      throw new SchemaError(`row ${line}: empty scheme`);
    }
    const epsilon = toNumber(record.epsilon, "epsilon", line);
    const key = `${scheme}@${epsilon}`;
    if (seen.has(key)) {
      throw new SchemaError(`duplicate (scheme, epsilon) key: ${key}`);
    }
    seen.add(key);
    if (record.ExpErr === "" || record.QLoss === "") {
      return; // infeasible sweep point: recorded in the CSV, not plottable
    }
    const row: SweepRow = {
      scheme,
      epsilon,
      expErr: toNumber(record.ExpErr, "ExpErr", line),
      qLoss: toNumber(record.QLoss, "QLoss", line),
      minExpEr: toNumber(record.min_ExpEr, "min_ExpEr", line),
    };
    const bucket = rows.get(scheme);
    if (bucket) {
      bucket.push(row);
    } else {
      rows.set(scheme, [row]);
    }
  });

  for (const bucket of rows.values()) {
    bucket.sort((a, b) => a.epsilon - b.epsilon);
  }
  if (rows.size === 0) {
    throw new SchemaError("no plottable rows (every point is infeasible)");
  }
  return { schemes: [...rows.keys()], rows };
}
