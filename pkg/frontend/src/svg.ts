import { Series } from "./aggregate";

export interface ChartSpec {
  series: Series[];
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                 "#8c564b", "#e377c2", "#7f7f7f"];
const MARGIN = { top: 24, right: 160, bottom: 52, left: 72 };

function fmt(x: number): string {
  // Fixed-precision coordinates keep the output byte-stable.
  return x.toFixed(2);
}

function tickValues(lo: number, hi: number, count = 6): number[] {
  if (hi === lo) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step;
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const nice = step * factor;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / nice) * nice; v <= hi + 1e-12; v += nice) {
    ticks.push(v);
  }
  return ticks;
}

function tickLabel(v: number): string {
  const rounded = Number(v.toPrecision(10));
  return Math.abs(rounded) >= 1e6 || (rounded !== 0 && Math.abs(rounded) < 1e-3)
    ? rounded.toExponential(1)
    : String(rounded);
}

/** Deterministic multi-line SVG chart: same spec, same bytes. */
export function renderLineChart(spec: ChartSpec): string {
  const width = spec.width ?? 860;
  const height = spec.height ?? 520;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  let xMax = 1;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of spec.series) {
    xMax = Math.max(xMax, s.startSlot + s.values.length - 1);
    for (const v of s.values) {
      yMin = Math.min(yMin, v);
      yMax = Math.max(yMax, v);
    }
  }
  yMin = Math.min(yMin, 0);
  if (yMax <= yMin) {
    yMax = yMin + 1;
  }
  const sx = (t: number) => MARGIN.left + (t / xMax) * plotW;
  const sy = (v: number) => MARGIN.top + plotH - ((v - yMin) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
             `height="${height}" viewBox="0 0 ${width} ${height}">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);

  for (const v of tickValues(yMin, yMax)) {
    const y = fmt(sy(v));
    parts.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${width - MARGIN.right}" ` +
               `y2="${y}" stroke="#dddddd" stroke-width="1"/>`);
    parts.push(`<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" ` +
               `dominant-baseline="middle" font-size="12" ` +
               `font-family="sans-serif">${tickLabel(v)}</text>`);
  }
  for (const t of tickValues(0, xMax)) {
    const x = fmt(sx(t));
    parts.push(`<line x1="${x}" y1="${MARGIN.top + plotH}" x2="${x}" ` +
               `y2="${MARGIN.top + plotH + 5}" stroke="#333333" stroke-width="1"/>`);
    parts.push(`<text x="${x}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" ` +
               `font-size="12" font-family="sans-serif">${tickLabel(t)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" ` +
             `height="${plotH}" fill="none" stroke="#333333" stroke-width="1"/>`);

  spec.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.values
      .map((v, j) => `${fmt(sx(s.startSlot + j))},${fmt(sy(v))}`)
      .join(" ");
    parts.push(`<polyline points="${pts}" fill="none" stroke="${color}" ` +
               `stroke-width="1.8" data-label="${s.label}"/>`);
    const ly = MARGIN.top + 16 + i * 20;
    const lx = width - MARGIN.right + 12;
    parts.push(`<line x1="${lx}" y1="${ly - 4}" x2="${lx + 24}" y2="${ly - 4}" ` +
               `stroke="${color}" stroke-width="1.8"/>`);
    parts.push(`<text x="${lx + 30}" y="${ly}" font-size="13" ` +
               `font-family="sans-serif">${s.label}</text>`);
  });

  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${height - 12}" ` +
             `text-anchor="middle" font-size="14" font-family="sans-serif">` +
             `${spec.xLabel}</text>`);
  parts.push(`<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
             `font-size="14" font-family="sans-serif" ` +
             `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">` +
             `${spec.yLabel}</text>`);
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
