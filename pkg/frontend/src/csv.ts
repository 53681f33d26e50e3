import { readFileSync } from "fs";
import Papa from "papaparse";

export const REQUIRED_COLUMNS = [
  "policy_label",
  "realization_id",
  "slot_index",
  "period_ms",
  "num_sectors",
  "R",
  "effective_rate_gbps",
  "normalized_reward",
  "cumulative_regret",
] as const;

export interface TraceRow {
  policy_label: string;
  realization_id: number;
  slot_index: number;
  effective_rate_gbps: number;
  cumulative_regret: number;
}

export class CsvError extends Error {}

/** Parse a beamband trace CSV, validating the schema up front. */
export function parseTraceCsv(path: string): TraceRow[] {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new CsvError(`malformed CSV at row ${first.row}: ${first.message}`);
  }
  const header = parsed.meta.fields ?? [];
  const missing = REQUIRED_COLUMNS.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new CsvError(`missing required columns: ${missing.join(", ")}`);
  }

  const rows: TraceRow[] = [];
  for (const raw of parsed.data) {
    const row: TraceRow = {
      policy_label: raw.policy_label,
      realization_id: Number(raw.realization_id),
      slot_index: Number(raw.slot_index),
      effective_rate_gbps: Number(raw.effective_rate_gbps),
      cumulative_regret: Number(raw.cumulative_regret),
    };
    if (
      row.policy_label === "" ||
      !Number.isInteger(row.realization_id) ||
      !Number.isInteger(row.slot_index) ||
      !Number.isFinite(row.effective_rate_gbps) ||
      !Number.isFinite(row.cumulative_regret)
    ) {
      throw new CsvError(`non-numeric or empty fields in row ${rows.length + 1}`);
    }
    rows.push(row);
  }
  if (rows.length === 0) {
    throw new CsvError("CSV contains no data rows");
  }
  return rows;
}
