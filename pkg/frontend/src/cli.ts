import { writeFileSync } from "fs";
import { parseArgs } from "util";

import { buildSeries, Metric } from "./aggregate";
import { CsvError, parseTraceCsv } from "./csv";
import { renderLineChart } from "./svg";

export type Mode = "plot-rate" | "plot-regret";

const METRIC: Record<Mode, Metric> = {
  "plot-rate": "effective_rate_gbps",
  "plot-regret": "cumulative_regret",
};
const Y_LABEL: Record<Mode, string> = {
  "plot-rate": "effective data rate (Gbps)",
  "plot-regret": "cumulative regret",
};
const DEFAULT_WINDOW: Record<Mode, number> = { "plot-rate": 10, "plot-regret": 1 };

function usage(mode: Mode): string {
  return `usage: ${mode} <csv> --out <svg> [--policies a,b] [--window N]`;
}

/** Returns the process exit code: 0 ok, 1 data error, 2 usage error. */
export function main(mode: Mode, argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        out: { type: "string" },
        policies: { type: "string" },
        window: { type: "string" },
      },
    });
  } catch (err) {
    console.error(`${(err as Error).message}\n${usage(mode)}`);
    return 2;
  }
  if (parsed.positionals.length !== 1 || !parsed.values.out) {
    console.error(usage(mode));
    return 2;
  }
  const window = parsed.values.window === undefined
    ? DEFAULT_WINDOW[mode]
    : Number(parsed.values.window);
  if (!Number.isInteger(window) || window < 1) {
    console.error(`--window must be a positive integer\n${usage(mode)}`);
    return 2;
  }
  const policies = parsed.values.policies?.split(",").map((s) => s.trim());

  try {
    const rows = parseTraceCsv(parsed.positionals[0]);
    const series = buildSeries(rows, METRIC[mode], policies, window);
    const svg = renderLineChart({
      series,
      xLabel: "time slot index",
      yLabel: Y_LABEL[mode],
    });
    writeFileSync(parsed.values.out, svg);
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
  console.log(`wrote ${parsed.values.out}`);
  return 0;
}
