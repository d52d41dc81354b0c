/** Minimal CSV reading with schema validation for the simulator's outputs. */

export class SchemaError extends Error {}

export type Row = Record<string, string>;

/**
 * Parse CSV text and check the header carries every required column.
 * The simulator writes plain unquoted fields, so splitting on commas is
 * sufficient here.
 */
export function parseCsv(text: string, required: readonly string[]): Row[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV: no header row");
  }
  const header = lines[0].split(",");
  for (const column of required) {
    if (!header.includes(column)) {
      throw new SchemaError(`missing column '${column}'`);
    }
  }
  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== header.length) {
      throw new SchemaError(
        `line ${i + 1}: expected ${header.length} fields, got ${parts.length}`,
      );
    }
    const row: Row = {};
    header.forEach((name, j) => {
      row[name] = parts[j];
    });
    rows.push(row);
  }
  return rows;
}

export function toNumber(row: Row, column: string, line: number): number {
  const value = Number(row[column]);
  if (!Number.isFinite(value)) {
    throw new SchemaError(
      `line ${line}: column '${column}': '${row[column]}' is not a number`,
    );
  }
  return value;
}
