/**
 * The three figure kinds: histogram with analytic density overlay, mean/band
 * curves with dashed theory lines, and an accuracy heatmap with an optional
 * boundary curve.  Everything is computed from already-written CSV tables;
 * no science is recomputed here.
 */

import { Table, columnIndex, distinctTuples, filterRows, numericColumn, parseNumeric, stringColumn } from "./csv.js";
import { Frame, SERIES_COLORS, Svg, THEORY_COLOR, extent, frame, linearScale, fmtTick } from "./svg.js";

export interface HistogramSpec {
  kind: "histogram";
  data: string;                 // MCSample table: replicate, probe, value
  fit?: string;                 // fit table with theory_mean/theory_var rows
  probe?: number;               // which probe column to plot (default 0)
  bins?: number;
  title?: string;
  xlabel?: string;
  ylabel?: string;
  out: string;
}

export interface CurvesSpec {
  kind: "curves";
  data: string;
  x: string;
  y: string;
  band?: string;                // column of half-band widths (std)
  series?: string[];            // group rows by these columns
  theory?: string;              // overlay table
  theoryX?: string;             // defaults to x
  theoryY?: string;             // defaults to y
  title?: string;
  xlabel?: string;
  ylabel?: string;
  logY?: boolean;
  out: string;
}

export interface HeatmapSpec {
  kind: "heatmap";
  data: string;
  x: string;
  y: string;
  value: string;
  filter?: Record<string, string>;
  boundary?: string;            // table with x column and y-boundary column
  boundaryX?: string;
  boundaryY?: string;
  title?: string;
  xlabel?: string;
  ylabel?: string;
  out: string;
}

export type FigureSpec = HistogramSpec | CurvesSpec | HeatmapSpec;

export interface Tables {
  (path: string): Table;        // loader, so tests can stub the filesystem
}

function gaussianPdf(x: number, mean: number, variance: number): number {
  return Math.exp(-((x - mean) ** 2) / (2 * variance)) / Math.sqrt(2 * Math.PI * variance);
}

export function renderHistogram(spec: HistogramSpec, load: Tables): string {
  const table = load(spec.data);
  if (table.rows.length === 0) throw new Error(`no rows in ${spec.data}`);
  const probe = String(spec.probe ?? 0);
  const sub = filterRows(table, { probe });
  if (sub.rows.length === 0) throw new Error(`no rows for probe ${probe} in ${spec.data}`);
  const values = numericColumn(sub, "value");
  const nBins = spec.bins ?? 40;
  const [lo, hi] = extent(values, 0.02);
  const w = (hi - lo) / nBins;
  const counts = new Array<number>(nBins).fill(0);
  for (const v of values) {
    const i = Math.min(Math.floor((v - lo) / w), nBins - 1);
    counts[i]++;
  }
  const density = counts.map((c) => c / (values.length * w));

  let overlay: { mean: number; variance: number } | null = null;
  if (spec.fit) {
    const fit = load(spec.fit);
    const match = filterRows(fit, { probe });
    if (match.rows.length === 0) throw new Error(`no fit row for probe ${probe}`);
    overlay = {
      mean: parseNumeric(match.rows[0][columnIndex(fit, "theory_mean")]),
      variance: parseNumeric(match.rows[0][columnIndex(fit, "theory_var")]),
    };
  }

  let yMax = Math.max(...density);
  if (overlay) yMax = Math.max(yMax, gaussianPdf(overlay.mean, overlay.mean, overlay.variance));
  const f = frame(520, 360, [lo, hi], [0, yMax * 1.08], spec.title ?? "",
                  spec.xlabel ?? "value", spec.ylabel ?? "density");
  for (let i = 0; i < nBins; i++) {
    if (counts[i] === 0) continue;
    const x0 = f.xScale(lo + i * w);
    const x1 = f.xScale(lo + (i + 1) * w);
    f.svg.rect(x0, f.yScale(density[i]), x1 - x0, f.yScale(0) - f.yScale(density[i]),
               "#7aa8d6", "#3b6ea5");
  }
  if (overlay) {
    const pts: Array<[number, number]> = [];
    for (let i = 0; i <= 240; i++) {
      const x = lo + ((hi - lo) * i) / 240;
      pts.push([f.xScale(x), f.yScale(gaussianPdf(x, overlay.mean, overlay.variance))]);
    }
    f.svg.polyline(pts, THEORY_COLOR, 2);
  }
  return f.svg.toString();
}

export function renderCurves(spec: CurvesSpec, load: Tables): string {
  const table = load(spec.data);
  if (table.rows.length === 0) throw new Error(`no rows in ${spec.data}`);
  const seriesCols = spec.series ?? [];
  const groups = seriesCols.length ? distinctTuples(table, seriesCols) : [[]];

  const xsAll: number[] = [];
  const ysAll: number[] = [];
  interface Line { label: string; x: number[]; y: number[]; band: number[] | null }
  const lines: Line[] = [];
  for (const tup of groups) {
    const match: Record<string, string> = {};
    seriesCols.forEach((c, i) => (match[c] = tup[i]));
    const sub = seriesCols.length ? filterRows(table, match) : table;
    const x = numericColumn(sub, spec.x);
    const y = numericColumn(sub, spec.y);
    const band = spec.band ? numericColumn(sub, spec.band) : null;
    xsAll.push(...x);
    ysAll.push(...y);
    if (band) {
      ysAll.push(...y.map((v, i) => v + band[i]), ...y.map((v, i) => v - band[i]));
    }
    const label = seriesCols.length
      ? seriesCols.map((c, i) => `${c}=${tup[i]}`).join(",")
      : spec.y;
    lines.push({ label, x, y, band });
  }

  let theory: { x: number[]; y: number[]; byGroup: Map<string, { x: number[]; y: number[] }> } | null = null;
  if (spec.theory) {
    const t = load(spec.theory);
    const tx = numericColumn(t, spec.theoryX ?? spec.x);
    const ty = numericColumn(t, spec.theoryY ?? spec.y);
    ysAll.push(...ty);
    const byGroup = new Map<string, { x: number[]; y: number[] }>();
    if (seriesCols.length && seriesCols.every((c) => t.columns.includes(c))) {
      for (const tup of groups) {
        const match: Record<string, string> = {};
        seriesCols.forEach((c, i) => (match[c] = tup[i]));
        const sub = filterRows(t, match);
        byGroup.set(tup.join(","), {
          x: numericColumn(sub, spec.theoryX ?? spec.x),
          y: numericColumn(sub, spec.theoryY ?? spec.y),
        });
      }
    }
    theory = { x: tx, y: ty, byGroup };
  }

  const f = frame(560, 380, extent(xsAll), extent(ysAll, 0.05), spec.title ?? "",
                  spec.xlabel ?? spec.x, spec.ylabel ?? spec.y);
  lines.forEach((ln, li) => {
    const color = SERIES_COLORS[li % SERIES_COLORS.length];
    const order = ln.x.map((_, i) => i).sort((a, b) => ln.x[a] - ln.x[b]);
    if (ln.band) {
      const upper = order.map((i) => [f.xScale(ln.x[i]), f.yScale(ln.y[i] + ln.band![i])] as [number, number]);
      const lower = order.map((i) => [f.xScale(ln.x[i]), f.yScale(ln.y[i] - ln.band![i])] as [number, number]).reverse();
      f.svg.polygon([...upper, ...lower], color, 0.18);
    }
    f.svg.polyline(order.map((i) => [f.xScale(ln.x[i]), f.yScale(ln.y[i])]), color, 1.8);
    for (const i of order) f.svg.circle(f.xScale(ln.x[i]), f.yScale(ln.y[i]), 2.4, color);
    f.svg.text(f.right - 6, f.top + 14 + 14 * li, ln.label, 10, "end");
    f.svg.line(f.right - 90, f.top + 10 + 14 * li, f.right - 70, f.top + 10 + 14 * li, color, 2);
  });
  if (theory) {
    if (theory.byGroup.size > 0) {
      for (const { x, y } of theory.byGroup.values()) {
        const order = x.map((_, i) => i).sort((a, b) => x[a] - x[b]);
        f.svg.polyline(order.map((i) => [f.xScale(x[i]), f.yScale(y[i])]), THEORY_COLOR, 1.6, "6 4");
      }
    } else {
      const order = theory.x.map((_, i) => i).sort((a, b) => theory!.x[a] - theory!.x[b]);
      f.svg.polyline(order.map((i) => [f.xScale(theory!.x[i]), f.yScale(theory!.y[i])]), THEORY_COLOR, 1.6, "6 4");
    }
  }
  return f.svg.toString();
}

/** Blue-to-red colormap over [0, 1]. */
export function heatColor(v: number): string {
  const t = Math.max(0, Math.min(1, v));
  const r = Math.round(40 + 205 * t);
  const g = Math.round(60 + 80 * (1 - Math.abs(t - 0.5) * 2));
  const b = Math.round(245 - 205 * t);
  return `rgb(${r},${g},${b})`;
}

export function renderHeatmap(spec: HeatmapSpec, load: Tables): string {
  let table = load(spec.data);
  if (spec.filter) table = filterRows(table, spec.filter);
  if (table.rows.length === 0) throw new Error(`no rows to plot in ${spec.data}`);
  const xs = numericColumn(table, spec.x);
  const ys = numericColumn(table, spec.y);
  const vs = numericColumn(table, spec.value);
  const xLevels = [...new Set(xs)].sort((a, b) => a - b);
  const yLevels = [...new Set(ys)].sort((a, b) => a - b);

  const width = 520;
  const height = 400;
  const left = 70;
  const top = spec.title ? 34 : 16;
  const cellW = (width - left - 80) / xLevels.length;
  const cellH = (height - top - 50) / yLevels.length;
  const svg = new Svg(width, height);
  const xPos = (x: number) => left + xLevels.indexOf(x) * cellW;
  const yPos = (y: number) => top + (yLevels.length - 1 - yLevels.indexOf(y)) * cellH;
  for (let i = 0; i < xs.length; i++) {
    svg.rect(xPos(xs[i]), yPos(ys[i]), cellW, cellH, heatColor(vs[i]), "#ffffff");
    svg.text(xPos(xs[i]) + cellW / 2, yPos(ys[i]) + cellH / 2 + 4,
             (Math.round(vs[i] * 100) / 100).toString(), 10);
  }
  for (const x of xLevels) svg.text(xPos(x) + cellW / 2, top + yLevels.length * cellH + 16, fmtTick(x), 10);
  for (const y of yLevels) svg.text(left - 8, yPos(y) + cellH / 2 + 4, fmtTick(y), 10, "end");
  if (spec.title) svg.text(left + (xLevels.length * cellW) / 2, 20, spec.title, 13);
  if (spec.xlabel) svg.text(left + (xLevels.length * cellW) / 2, height - 10, spec.xlabel, 11);
  if (spec.ylabel) svg.text(18, top + (yLevels.length * cellH) / 2, spec.ylabel, 11, "middle", -90);

  if (spec.boundary) {
    const b = load(spec.boundary);
    const bx = numericColumn(b, spec.boundaryX ?? spec.x);
    const by = numericColumn(b, spec.boundaryY ?? `${spec.y}_boundary`);
    // piecewise map the boundary into cell coordinates
    const xIdx = linearScale([xLevels[0], xLevels[xLevels.length - 1]],
                             [left + cellW / 2, left + (xLevels.length - 0.5) * cellW]);
    const yIdx = (y: number) => {
      const span = Math.max(1e-12, yLevels[yLevels.length - 1] - yLevels[0]);
      const fr = (y - yLevels[0]) / span;
      return top + (yLevels.length - 0.5 - fr * (yLevels.length - 1)) * cellH;
    };
    const pts = bx.map((x, i) => [xIdx(x), yIdx(by[i])] as [number, number])
      .filter(([, y]) => Number.isFinite(y));
    if (pts.length > 1) svg.polyline(pts, "#111111", 2, "7 5");
  }

  // color legend
  const lx = width - 58;
  for (let i = 0; i <= 40; i++) {
    const v = i / 40;
    svg.rect(lx, top + (40 - i) * 5, 14, 5.2, heatColor(v));
  }
  svg.text(lx + 28, top + 208, "0", 9);
  svg.text(lx + 28, top + 6, "1", 9);
  return svg.toString();
}

export function renderFigure(spec: FigureSpec, load: Tables): string {
  switch (spec.kind) {
    case "histogram":
      return renderHistogram(spec, load);
    case "curves":
      return renderCurves(spec, load);
    case "heatmap":
      return renderHeatmap(spec, load);
    default:
      throw new Error(`unknown figure kind ${(spec as { kind: string }).kind}`);
  }
}
