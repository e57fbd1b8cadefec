import fs from "fs";

/** Input file violates the frozen CSV contract. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

export interface Table {
  /** Source path, kept for error messages. */
  path: string;
  header: string[];
  /** Raw cell strings, one array per data row. */
  rows: string[][];
}

/**
 * Reads a CSV file produced by the simulation CLI. Both LF and CRLF line
 * endings are accepted; fields never contain quotes or embedded commas, so
 * a plain split is enough.
 */
export function readTable(path: string): Table {
  const text = fs.readFileSync(path, "utf-8");
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${path}: empty file`);
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line, i) => {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new SchemaError(
        `${path}: row ${i + 1} has ${cells.length} fields, header has ${header.length}`
      );
    }
    return cells;
  });
  return { path, header, rows };
}

/**
 * Checks the header against the expected column list, position by position.
 * The first disagreement is reported by column name so the caller can tell
 * which field moved or got renamed.
 */
export function requireHeader(table: Table, expected: string[]): void {
  const got = table.header;
  const n = Math.min(got.length, expected.length);
  for (let i = 0; i < n; ++i) {
    if (got[i] !== expected[i]) {
      throw new SchemaError(
        `${table.path}: column ${i + 1} is "${got[i]}", expected "${expected[i]}"`
      );
    }
  }
  if (got.length < expected.length) {
    throw new SchemaError(`${table.path}: missing column "${expected[got.length]}"`);
  }
  if (got.length > expected.length) {
    throw new SchemaError(`${table.path}: unexpected column "${got[expected.length]}"`);
  }
}

/** Column values as numbers; NaN cells are let through for the caller. */
export function numericColumn(table: Table, name: string): number[] {
  const k = table.header.indexOf(name);
  if (k < 0) {
    throw new SchemaError(`${table.path}: missing column "${name}"`);
  }
  return table.rows.map((row) => Number(row[k]));
}

export function stringColumn(table: Table, name: string): string[] {
  const k = table.header.indexOf(name);
  if (k < 0) {
    throw new SchemaError(`${table.path}: missing column "${name}"`);
  }
  return table.rows.map((row) => row[k]);
}
