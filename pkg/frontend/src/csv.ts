import { readFileSync } from "node:fs";

export const SCHEMA = "subcellsbp.v1";

export type CsvKind = "snapshot" | "error_series" | "spectrum" | "rate_series" | "convergence";

export interface CsvTable {
  path: string;
  kind: CsvKind;
  columns: string[];
  /** numeric cells; NaN marks empty or non-numeric entries */
  rows: number[][];
  /** raw string cells, exactly as stored */
  raw: string[][];
}

export interface ColumnSummary {
  min: number | null;
  max: number | null;
}

/** Parse one schema-versioned CSV produced by the solver CLI. */
export function readCsv(path: string): CsvTable {
  const text = readFileSync(path, "utf-8");
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new Error(`${path}: not a schema-versioned CSV (too short)`);
  }
  const header = lines[0].split(" ");
  if (header.length !== 4 || header[0] !== "#" || header[1] !== "schema" || header[2] !== SCHEMA) {
    throw new Error(`${path}: missing or foreign schema header: ${lines[0]}`);
  }
  const kind = header[3] as CsvKind;
  const columns = lines[1].split(",");
  const raw = lines.slice(2).map((line) => line.split(","));
  for (const cells of raw) {
    if (cells.length !== columns.length) {
      throw new Error(`${path}: row has ${cells.length} cells, expected ${columns.length}`);
    }
  }
  const rows = raw.map((cells) => cells.map((cell) => (cell === "" ? NaN : Number(cell))));
  return { path, kind, columns, rows, raw };
}

export function requireColumns(table: CsvTable, names: string[]): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new Error(`${table.path}: missing column '${name}'`);
    }
  }
}

export function column(table: CsvTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) {
    throw new Error(`${table.path}: missing column '${name}'`);
  }
  return table.rows.map((row) => row[idx]);
}

export function columnsMatching(table: CsvTable, pattern: RegExp): string[] {
  return table.columns.filter((name) => pattern.test(name));
}

/** Per-column min/max over the finite entries; null for empty columns. */
export function summarize(table: CsvTable): Record<string, ColumnSummary> {
  const summary: Record<string, ColumnSummary> = {};
  table.columns.forEach((name, j) => {
    let min = Infinity;
    let max = -Infinity;
    let seen = false;
    for (const row of table.rows) {
      const value = row[j];
      if (Number.isFinite(value)) {
        seen = true;
        if (value < min) min = value;
        if (value > max) max = value;
      }
    }
    summary[name] = seen ? { min, max } : { min: null, max: null };
  });
  return summary;
}
