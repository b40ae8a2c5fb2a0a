/**
 * Small deterministic SVG builder: linear scales, ticks, and a handful of
 * shape helpers.  Text assembly only, so identical inputs give
 * byte-identical files.
 */

export interface Scale {
  (v: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  f.range = range;
  return f;
}

export function extent(values: number[], padFrac = 0.0): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (Number.isFinite(v)) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!Number.isFinite(lo)) throw new Error("no finite values to scale");
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = (hi - lo) * padFrac;
  return [lo - pad, hi + pad];
}

/** Round tick positions covering the domain, roughly `count` of them. */
export function ticks(domain: [number, number], count = 5): number[] {
  const [lo, hi] = domain;
  const span = hi - lo;
  if (span <= 0) return [lo];
  const step0 = span / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const norm = step0 / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const start = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let i = 0; start + i * step <= hi + 1e-9 * span; i++) {
    const v = start + i * step;
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  return String(Math.round(v * 1e6) / 1e6);
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const n = (v: number) => (Math.round(v * 100) / 100).toString();

export class Svg {
  private parts: string[] = [];
  constructor(readonly width: number, readonly height: number) {}

  rect(x: number, y: number, w: number, h: number, fill: string, stroke = "none"): void {
    this.parts.push(`<rect x="${n(x)}" y="${n(y)}" width="${n(w)}" height="${n(h)}" fill="${fill}" stroke="${stroke}"/>`);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string, width = 1, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.parts.push(`<line x1="${n(x1)}" y1="${n(y1)}" x2="${n(x2)}" y2="${n(y2)}" stroke="${stroke}" stroke-width="${width}"${d}/>`);
  }

  polyline(pts: Array<[number, number]>, stroke: string, width = 1.5, dash = ""): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    const p = pts.map(([x, y]) => `${n(x)},${n(y)}`).join(" ");
    this.parts.push(`<polyline points="${p}" fill="none" stroke="${stroke}" stroke-width="${width}"${d}/>`);
  }

  polygon(pts: Array<[number, number]>, fill: string, opacity = 1.0): void {
    const p = pts.map(([x, y]) => `${n(x)},${n(y)}`).join(" ");
    this.parts.push(`<polygon points="${p}" fill="${fill}" fill-opacity="${opacity}" stroke="none"/>`);
  }

  circle(x: number, y: number, r: number, fill: string): void {
    this.parts.push(`<circle cx="${n(x)}" cy="${n(y)}" r="${n(r)}" fill="${fill}"/>`);
  }

  text(x: number, y: number, s: string, size = 11, anchor = "middle", rotate = 0): void {
    const tr = rotate ? ` transform="rotate(${rotate} ${n(x)} ${n(y)})"` : "";
    this.parts.push(`<text x="${n(x)}" y="${n(y)}" font-size="${size}" font-family="Helvetica, Arial, sans-serif" text-anchor="${anchor}"${tr}>${esc(s)}</text>`);
  }

  toString(): string {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${this.width}" height="${this.height}" viewBox="0 0 ${this.width} ${this.height}">\n`
      + `<rect width="${this.width}" height="${this.height}" fill="white"/>\n`
      + this.parts.join("\n") + "\n</svg>\n";
  }
}

export interface Frame {
  svg: Svg;
  xScale: Scale;
  yScale: Scale;
  left: number;
  top: number;
  right: number;
  bottom: number;
}

/** Plot frame with axes, tick labels, optional title and axis labels. */
export function frame(width: number, height: number, xDom: [number, number],
                      yDom: [number, number], title = "", xlabel = "",
                      ylabel = ""): Frame {
  const left = 62;
  const right = width - 16;
  const top = title ? 30 : 14;
  const bottom = height - (xlabel ? 44 : 30);
  const svg = new Svg(width, height);
  const xScale = linearScale(xDom, [left, right]);
  const yScale = linearScale(yDom, [bottom, top]);
  svg.line(left, bottom, right, bottom, "#222");
  svg.line(left, top, left, bottom, "#222");
  for (const t of ticks(xDom)) {
    const x = xScale(t);
    svg.line(x, bottom, x, bottom + 4, "#222");
    svg.text(x, bottom + 16, fmtTick(t), 10);
  }
  for (const t of ticks(yDom)) {
    const y = yScale(t);
    svg.line(left - 4, y, left, y, "#222");
    svg.text(left - 7, y + 3, fmtTick(t), 10, "end");
  }
  if (title) svg.text((left + right) / 2, 18, title, 13);
  if (xlabel) svg.text((left + right) / 2, height - 8, xlabel, 11);
  if (ylabel) svg.text(16, (top + bottom) / 2, ylabel, 11, "middle", -90);
  return { svg, xScale, yScale, left, top, right, bottom };
}

export const SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                              "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"];
export const THEORY_COLOR = "#ff7f0e";
