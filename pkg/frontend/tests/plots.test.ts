import { execFileSync } from "child_process";
import { existsSync, mkdtempSync, readFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { buildSeries, fitSlope, movingAverage, perSlotMean } from "../src/aggregate";
import { main } from "../src/cli";
import { CsvError, parseTraceCsv } from "../src/csv";
import { renderLineChart } from "../src/svg";

const FIXTURES = join(__dirname, "fixtures");
const S1 = join(FIXTURES, "s1.csv");
const S1_SINGLE = join(FIXTURES, "s1-single.csv");
const S1_CORRUPT = join(FIXTURES, "s1-corrupt.csv");
const LABELS = ["ucb1", "ts", "random", "genius", "worst"];

function tmpOut(name: string): string {
  return join(mkdtempSync(join(tmpdir(), "beamband-plots-")), name);
}

describe("movingAverage", () => {
  it("computes trailing means", () => {
    expect(movingAverage([1, 2, 3, 4], 2)).toEqual([1.5, 2.5, 3.5]);
  });
  it("window 1 is the identity", () => {
    expect(movingAverage([3, 1, 4], 1)).toEqual([3, 1, 4]);
  });
  it("empty when the window exceeds the data", () => {
    expect(movingAverage([1, 2], 3)).toEqual([]);
  });
});

describe("parseTraceCsv", () => {
  it("reads the scenario I fixture", () => {
    const rows = parseTraceCsv(S1);
    expect(rows.length).toBe(5 * 20 * 120);
    expect(new Set(rows.map((r) => r.policy_label))).toEqual(new Set(LABELS));
  });
  it("rejects a corrupted header naming the column", () => {
    expect(() => parseTraceCsv(S1_CORRUPT)).toThrowError(CsvError);
    expect(() => parseTraceCsv(S1_CORRUPT)).toThrowError(/effective_rate_gbps/);
  });
});

describe("aggregation", () => {
  it("averages across realizations per slot", () => {
    const rows = [
      { policy_label: "a", realization_id: 0, slot_index: 0, effective_rate_gbps: 1, cumulative_regret: 0 },
      { policy_label: "a", realization_id: 1, slot_index: 0, effective_rate_gbps: 3, cumulative_regret: 0 },
      { policy_label: "a", realization_id: 0, slot_index: 1, effective_rate_gbps: 5, cumulative_regret: 0 },
      { policy_label: "a", realization_id: 1, slot_index: 1, effective_rate_gbps: 7, cumulative_regret: 0 },
    ];
    const curves = perSlotMean(rows, "effective_rate_gbps");
    expect(curves.get("a")).toEqual([2, 6]);
  });

  it("single-realization curve equals the raw trace", () => {
    const rows = parseTraceCsv(S1_SINGLE);
    const [series] = buildSeries(rows, "effective_rate_gbps", ["ucb1"], 1);
    const raw = rows
      .sort((a, b) => a.slot_index - b.slot_index)
      .map((r) => r.effective_rate_gbps);
    expect(series.values).toEqual(raw);
  });

  it("rejects policies missing from the CSV", () => {
    const rows = parseTraceCsv(S1_SINGLE);
    expect(() => buildSeries(rows, "effective_rate_gbps", ["nosuch"], 1))
      .toThrowError(/nosuch/);
  });

  it("genius regret is identically zero and random grows linearly", () => {
    const rows = parseTraceCsv(S1);
    const curves = perSlotMean(rows, "cumulative_regret");
    expect(Math.max(...curves.get("genius")!)).toBe(0);
    expect(fitSlope(curves.get("random")!)).toBeGreaterThan(0);
  });

  it("bandit regret is concave: late slope below early slope", () => {
    const rows = parseTraceCsv(S1);
    const ucb1 = perSlotMean(rows, "cumulative_regret").get("ucb1")!;
    const early = fitSlope(ucb1.slice(0, 40));
    const late = fitSlope(ucb1.slice(-40));
    expect(late).toBeLessThan(early);
  });
});

describe("plot-rate CLI", () => {
  it("renders five labeled curves from the scenario I CSV", () => {
    const out = tmpOut("s1.svg");
    const code = main("plot-rate", [S1, "--out", out, "--window", "10"]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg.match(/<polyline /g)?.length).toBe(5);
    for (const label of LABELS) {
      expect(svg).toContain(`data-label="${label}"`);
      expect(svg).toContain(`>${label}</text>`);
    }
    expect(svg).toContain("effective data rate (Gbps)");
    expect(svg).toContain("time slot index");
  });

  it("is a pure function of the CSV: identical bytes on re-render", () => {
    const a = tmpOut("a.svg");
    const b = tmpOut("b.svg");
    expect(main("plot-rate", [S1, "--out", a])).toBe(0);
    expect(main("plot-rate", [S1, "--out", b])).toBe(0);
    expect(readFileSync(a, "utf8")).toEqual(readFileSync(b, "utf8"));
  });

  it("filters to the requested policies", () => {
    const out = tmpOut("subset.svg");
    const code = main("plot-rate", [S1, "--out", out, "--policies", "ucb1,random"]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg.match(/<polyline /g)?.length).toBe(2);
  });

  it("exits nonzero on a corrupted CSV and writes nothing", () => {
    const out = tmpOut("never.svg");
    expect(main("plot-rate", [S1_CORRUPT, "--out", out])).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("exits nonzero on an empty policy selection", () => {
    const out = tmpOut("never2.svg");
    expect(main("plot-rate", [S1, "--out", out, "--policies", "zipzap"])).toBe(1);
    expect(existsSync(out)).toBe(false);
  });

  it("rejects bad usage with exit 2", () => {
    expect(main("plot-rate", [S1])).toBe(2);
    expect(main("plot-rate", [S1, "--out", tmpOut("x.svg"), "--window", "0"])).toBe(2);
    expect(main("plot-rate", [S1, "--out", tmpOut("y.svg"), "--bogus"])).toBe(2);
  });
});

describe("plot-regret CLI", () => {
  it("renders cumulative regret curves", () => {
    const out = tmpOut("regret.svg");
    const code = main("plot-regret", [S1, "--out", out,
                                      "--policies", "ucb1,random,genius"]);
    expect(code).toBe(0);
    const svg = readFileSync(out, "utf8");
    expect(svg.match(/<polyline /g)?.length).toBe(3);
    expect(svg).toContain("cumulative regret");
  });
});

describe("built binaries", () => {
  it("dist/plot-rate.js works end to end after tsc", () => {
    execFileSync("npx", ["tsc"], { cwd: join(__dirname, "..") });
    const out = tmpOut("dist.svg");
    execFileSync("node", [join(__dirname, "..", "dist", "plot-rate.js"),
                          S1, "--out", out]);
    expect(readFileSync(out, "utf8")).toContain("<svg");
  });
});

describe("renderLineChart", () => {
  it("keeps zero on the y axis and draws a legend entry per series", () => {
    const svg = renderLineChart({
      series: [{ label: "flat", startSlot: 0, values: [2, 2, 2] }],
      xLabel: "x",
      yLabel: "y",
    });
    expect(svg).toContain('data-label="flat"');
    expect(svg).toContain(">0<");
  });
});
