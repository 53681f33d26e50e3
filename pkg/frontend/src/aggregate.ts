import { CsvError, TraceRow } from "./csv";

export type Metric = "effective_rate_gbps" | "cumulative_regret";

export interface Series {
  label: string;
  /** Slot index of the first value (smoothing trims the leading edge). */
  startSlot: number;
  values: number[];
}

/** Trailing moving average; returns length - n + 1 values. */
export function movingAverage(values: number[], n: number): number[] {
  if (n <= 0 || values.length < n) return [];
  const out: number[] = [];
  let sum = 0;
  for (let i = 0; i < values.length; i++) {
    sum += values[i];
    if (i >= n) sum -= values[i - n];
    if (i >= n - 1) out.push(sum / n);
  }
  return out;
}

/** Per-slot mean across realizations for every policy in the file. */
export function perSlotMean(rows: TraceRow[], metric: Metric): Map<string, number[]> {
  const sums = new Map<string, { sum: number[]; count: number[] }>();
  for (const row of rows) {
    let acc = sums.get(row.policy_label);
    if (!acc) {
      acc = { sum: [], count: [] };
      sums.set(row.policy_label, acc);
    }
    const t = row.slot_index;
    acc.sum[t] = (acc.sum[t] ?? 0) + row[metric];
    acc.count[t] = (acc.count[t] ?? 0) + 1;
  }
  const out = new Map<string, number[]>();
  for (const [label, acc] of sums) {
    const curve = acc.sum.map((s, t) => {
      if (acc.count[t] === undefined) {
        throw new CsvError(`policy ${label}: slot ${t} has no rows`);
      }
      return s / acc.count[t];
    });
    out.set(label, curve);
  }
  return out;
}

/**
 * Mean curves for the requested policies (all policies when unspecified),
 * smoothed with a trailing window.
 */
export function buildSeries(
  rows: TraceRow[],
  metric: Metric,
  policies: string[] | undefined,
  window: number,
): Series[] {
  if (window < 1 || !Number.isInteger(window)) {
    throw new CsvError(`smoothing window must be a positive integer, got ${window}`);
  }
  const curves = perSlotMean(rows, metric);
  const wanted = policies ?? [...curves.keys()];
  if (wanted.length === 0) {
    throw new CsvError("no policies selected");
  }
  const missing = wanted.filter((p) => !curves.has(p));
  if (missing.length > 0) {
    throw new CsvError(
      `requested policies not in the CSV: ${missing.join(", ")} ` +
      `(available: ${[...curves.keys()].join(", ")})`);
  }
  return wanted.map((label) => {
    const curve = curves.get(label)!;
    const values = window > 1 ? movingAverage(curve, window) : curve;
    if (values.length === 0) {
      throw new CsvError(
        `window ${window} exceeds the ${curve.length}-slot trace for ${label}`);
    }
    return { label, startSlot: window - 1, values };
  });
}

/** Least-squares slope over the values' indices. */
export function fitSlope(values: number[]): number {
  const n = values.length;
  const xMean = (n - 1) / 2;
  const yMean = values.reduce((a, b) => a + b, 0) / n;
  let num = 0;
  let den = 0;
  for (let i = 0; i < n; i++) {
    num += (i - xMean) * (values[i] - yMean);
    den += (i - xMean) * (i - xMean);
  }
  return num / den;
}
