/**
 * Result-CSV schema: parsing and validation.
 *
 * The simulator emits one row per (sweep point, method) plus closed-form
 * overlay rows (method labels EQ13/EQ14/EQ29/EQ31 with trials=0). All columns
 * below must be present; extra columns are rejected so schema drift is caught
 * at the boundary.
 */
import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "sweep_variable",
  "sweep_value",
  "method",
  "metric",
  "mean",
  "stderr",
  "trials",
  "n_r",
  "n_rf",
  "n_u",
  "bits",
  "snr_db",
  "channel_model",
  "seed",
] as const;

export type ColumnName = (typeof REQUIRED_COLUMNS)[number];

export const OVERLAY_METHODS = new Set(["EQ13", "EQ14", "EQ29", "EQ31"]);

export interface ResultRow {
  sweep_variable: string;
  sweep_value: number;
  method: string;
  metric: string;
  mean: number;
  stderr: number;
  trials: number;
  n_r: number;
  n_rf: number;
  n_u: number;
  bits: number; // Infinity for perfect quantization ("inf" in the file)
  snr_db: number;
  channel_model: string;
  seed: string;
}

export class SchemaError extends Error {}

function parseNumber(raw: string, column: string, line: number): number {
  if (raw === "inf") return Infinity;
  const value = Number(raw);
  if (raw.trim() === "" || Number.isNaN(value)) {
    throw new SchemaError(
      `column '${column}' has non-numeric value '${raw}' on data row ${line}`,
    );
  }
  return value;
}

export function parseResultsCsv(text: string): ResultRow[] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`CSV parse failure: ${parsed.errors[0].message}`);
  }
  const rows = parsed.data;
  if (rows.length === 0) {
    throw new SchemaError("CSV is empty (no header row)");
  }
  const header = rows[0];
  for (const column of REQUIRED_COLUMNS) {
    if (!header.includes(column)) {
      throw new SchemaError(`missing required column '${column}'`);
    }
  }
  for (const column of header) {
    if (!(REQUIRED_COLUMNS as readonly string[]).includes(column)) {
      throw new SchemaError(`unexpected column '${column}'`);
    }
  }
  if (rows.length === 1) {
    throw new SchemaError("CSV has a header but no data rows");
  }
  const index = new Map(header.map((name, i) => [name, i]));
  const at = (row: string[], column: ColumnName): string =>
    row[index.get(column)!];
  return rows.slice(1).map((row, i) => {
    if (row.length !== header.length) {
      throw new SchemaError(
        `data row ${i + 1} has ${row.length} fields, expected ${header.length}`,
      );
    }
    const num = (column: ColumnName) => parseNumber(at(row, column), column, i + 1);
    return {
      sweep_variable: at(row, "sweep_variable"),
      sweep_value: num("sweep_value"),
      method: at(row, "method"),
      metric: at(row, "metric"),
      mean: num("mean"),
      stderr: num("stderr"),
      trials: num("trials"),
      n_r: num("n_r"),
      n_rf: num("n_rf"),
      n_u: num("n_u"),
      bits: num("bits"),
      snr_db: num("snr_db"),
      channel_model: at(row, "channel_model"),
      seed: at(row, "seed"),
    };
  });
}
