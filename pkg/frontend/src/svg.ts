/**
 * Minimal SVG plot scaffolding: linear scales, tick generation, and string
 * builders for the handful of shapes the figure renderers need. Everything
 * is deterministic string assembly; no DOM, no timestamps, no randomness,
 * so re-rendering the same input yields byte-identical output.
 */

export interface Extent {
  min: number;
  max: number;
}

export interface Margin {
  top: number;
  right: number;
  bottom: number;
  left: number;
}

export const WIDTH = 860;
export const HEIGHT = 440;
export const MARGIN: Margin = { top: 44, right: 24, bottom: 52, left: 72 };

/** Paired line/fill colors, one per series, recycled past the end. */
export const PALETTE = ["#1f6fb2", "#d1495b", "#2e8b57", "#8c5ab8", "#c87d2f", "#3b3b3b"];

// ── scales and ticks ──────────────────────────────────────────────────────

/** Finite extent of xs, padded when degenerate so a flat series still plots. */
export function extentOf(xs: number[]): Extent {
  let min = Infinity;
  let max = -Infinity;
  for (const x of xs) {
    if (x < min) min = x;
    if (x > max) max = x;
  }
  if (!Number.isFinite(min) || !Number.isFinite(max)) {
    return { min: 0, max: 1 };
  }
  if (min === max) {
    const pad = Math.abs(min) > 0 ? Math.abs(min) * 0.1 : 1;
    return { min: min - pad, max: max + pad };
  }
  return { min, max };
}

/** Linear map from a data extent onto pixel coordinates. */
export function linearScale(domain: Extent, range: [number, number]): (x: number) => number {
  const span = domain.max - domain.min;
  const [lo, hi] = range;
  return (x: number) => lo + ((x - domain.min) / span) * (hi - lo);
}

/** Round tick positions at a 1/2/5 step covering the extent. */
export function ticks(domain: Extent, count = 6): number[] {
  const span = domain.max - domain.min;
  if (span <= 0) return [domain.min];
  const raw = span / Math.max(count, 2);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 10 : norm >= 2 ? 5 : norm >= 1 ? 2 : 1) * mag;
  const start = Math.ceil(domain.min / step) * step;
  const out: number[] = [];
  for (let v = start; v <= domain.max + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

/** Compact tick label: trims float noise, keeps scientific form for extremes. */
export function fmtTick(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1).replace("e+", "e");
  const s = v.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
}

// ── string builders ───────────────────────────────────────────────────────

/** XML-escape text content and attribute values. */
export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function px(v: number): string {
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

export interface LineStyle {
  stroke: string;
  width?: number;
  dash?: string;
}

/** Polyline through pixel-space points; single points degrade to a dot. */
export function polyline(points: Array<[number, number]>, style: LineStyle): string {
  if (points.length === 1) {
    const [x, y] = points[0]!;
    return circle(x, y, 3.5, style.stroke);
  }
  const attr = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
  return `<polyline points="${attr}" fill="none" stroke="${style.stroke}" stroke-width="${style.width ?? 1.6}"${dash}/>`;
}

export function circle(cx: number, cy: number, r: number, fill: string): string {
  return `<circle cx="${px(cx)}" cy="${px(cy)}" r="${px(r)}" fill="${fill}"/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number, style: LineStyle): string {
  const dash = style.dash ? ` stroke-dasharray="${style.dash}"` : "";
  return `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}" stroke="${style.stroke}" stroke-width="${style.width ?? 1}"${dash}/>`;
}

export interface TextStyle {
  size?: number;
  anchor?: "start" | "middle" | "end";
  fill?: string;
  rotate?: number;
}

export function text(x: number, y: number, content: string, style: TextStyle = {}): string {
  const size = style.size ?? 12;
  const anchor = style.anchor ?? "start";
  const fill = style.fill ?? "#222";
  const transform = style.rotate ? ` transform="rotate(${style.rotate} ${px(x)} ${px(y)})"` : "";
  return (
    `<text x="${px(x)}" y="${px(y)}" font-family="Helvetica, Arial, sans-serif" ` +
    `font-size="${size}" text-anchor="${anchor}" fill="${fill}"${transform}>${esc(content)}</text>`
  );
}

// ── axes and frame ────────────────────────────────────────────────────────

export interface AxesSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xDomain: Extent;
  yDomain: Extent;
  /** Explicit x tick positions (value, label); default 1/2/5 ticks. */
  xTicks?: Array<[number, string]>;
}

export interface Frame {
  x: (v: number) => number;
  y: (v: number) => number;
  body: string[];
  plotLeft: number;
  plotRight: number;
  plotTop: number;
  plotBottom: number;
}

/** Build the plot frame: background, grid, ticks, labels, and title. */
export function frame(spec: AxesSpec): Frame {
  const left = MARGIN.left;
  const right = WIDTH - MARGIN.right;
  const top = MARGIN.top;
  const bottom = HEIGHT - MARGIN.bottom;
  const x = linearScale(spec.xDomain, [left, right]);
  const y = linearScale(spec.yDomain, [bottom, top]);
  const body: string[] = [];
  body.push(`<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  body.push(
    `<rect x="${left}" y="${top}" width="${right - left}" height="${bottom - top}" fill="none" stroke="#444" stroke-width="1"/>`,
  );
  const xt = spec.xTicks ?? ticks(spec.xDomain).map((v): [number, string] => [v, fmtTick(v)]);
  for (const [v, label] of xt) {
    if (v < spec.xDomain.min - 1e-9 || v > spec.xDomain.max + 1e-9) continue;
    const xp = x(v);
    body.push(line(xp, top, xp, bottom, { stroke: "#ddd", width: 0.7 }));
    body.push(line(xp, bottom, xp, bottom + 5, { stroke: "#444" }));
    body.push(text(xp, bottom + 19, label, { anchor: "middle" }));
  }
  for (const v of ticks(spec.yDomain)) {
    const yp = y(v);
    body.push(line(left, yp, right, yp, { stroke: "#ddd", width: 0.7 }));
    body.push(line(left - 5, yp, left, yp, { stroke: "#444" }));
    body.push(text(left - 8, yp + 4, fmtTick(v), { anchor: "end" }));
  }
  body.push(text((left + right) / 2, HEIGHT - 14, spec.xLabel, { anchor: "middle", size: 13 }));
  body.push(text(18, (top + bottom) / 2, spec.yLabel, { anchor: "middle", size: 13, rotate: -90 }));
  body.push(text((left + right) / 2, 24, spec.title, { anchor: "middle", size: 15 }));
  return { x, y, body, plotLeft: left, plotRight: right, plotTop: top, plotBottom: bottom };
}

/** Legend swatches drawn inside the top-right corner of the plot area. */
export function legend(fr: Frame, entries: Array<{ label: string; style: LineStyle }>): string[] {
  const out: string[] = [];
  const x0 = fr.plotLeft + 12;
  let yRow = fr.plotTop + 16;
  for (const e of entries) {
    out.push(line(x0, yRow - 4, x0 + 26, yRow - 4, { ...e.style, width: e.style.width ?? 2 }));
    out.push(text(x0 + 32, yRow, e.label, { size: 12 }));
    yRow += 17;
  }
  return out;
}

/** Assemble the final SVG document string. */
export function document(body: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
    body.join("\n") +
    "\n</svg>\n"
  );
}
