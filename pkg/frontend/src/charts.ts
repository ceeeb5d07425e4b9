/**
 * Figure renderers, one per artifact kind. Each consumes a validated
 * ParsedCsv and returns a complete SVG document string.
 */

import { numberColumn, stringColumn, type ParsedCsv } from "./csv.js";
import {
  PALETTE,
  document,
  extentOf,
  frame,
  legend,
  line,
  circle,
  polyline,
  text,
  type Extent,
  type LineStyle,
} from "./svg.js";

function styleFor(i: number): LineStyle {
  const stroke = PALETTE[i % PALETTE.length]!;
  // alternate dash pattern once the palette recycles so series stay distinct
  return i < PALETTE.length ? { stroke } : { stroke, dash: "6 3" };
}

function groupIndices(keys: string[]): Map<string, number[]> {
  const groups = new Map<string, number[]>();
  keys.forEach((k, i) => {
    const bucket = groups.get(k);
    if (bucket) bucket.push(i);
    else groups.set(k, [i]);
  });
  return groups;
}

function padded(e: Extent, frac = 0.04): Extent {
  const pad = (e.max - e.min) * frac;
  return { min: e.min - pad, max: e.max + pad };
}

// ── convergence trace ─────────────────────────────────────────────────────

/** Sum rate against iteration, one labeled curve per optimizer mode. */
export function renderConvergence(parsed: ParsedCsv): string {
  const iters = numberColumn(parsed, "iteration");
  const rates = numberColumn(parsed, "sum_rate_bits");
  const modes = stringColumn(parsed, "mode");
  const fr = frame({
    title: "sum rate vs iteration",
    xLabel: "iteration",
    yLabel: "weighted sum rate [bit/s/Hz]",
    xDomain: extentOf(iters),
    yDomain: padded(extentOf(rates)),
  });
  const body = [...fr.body];
  const entries: Array<{ label: string; style: LineStyle }> = [];
  let si = 0;
  for (const [mode, idx] of groupIndices(modes)) {
    const style = styleFor(si++);
    const pts = idx
      .slice()
      .sort((a, b) => iters[a]! - iters[b]!)
      .map((i): [number, number] => [fr.x(iters[i]!), fr.y(rates[i]!)]);
    body.push(polyline(pts, style));
    entries.push({ label: mode, style });
  }
  body.push(...legend(fr, entries));
  return document(body);
}

// ── element-count sweep ───────────────────────────────────────────────────

/** Sum rate against surface element count, split by link count and mode. */
export function renderSweep(parsed: ParsedCsv): string {
  const links = numberColumn(parsed, "L");
  const counts = numberColumn(parsed, "P");
  const rates = numberColumn(parsed, "sum_rate_bits");
  const modes = stringColumn(parsed, "mode");
  const logp = counts.map((p) => Math.log2(p));
  const distinct = [...new Set(counts)].sort((a, b) => a - b);
  const fr = frame({
    title: "sum rate vs surface element count",
    xLabel: "elements per surface",
    yLabel: "weighted sum rate [bit/s/Hz]",
    xDomain: padded(extentOf(logp), 0.08),
    yDomain: padded(extentOf(rates)),
    xTicks: distinct.map((p): [number, string] => [Math.log2(p), String(p)]),
  });
  const body = [...fr.body];
  const keys = modes.map((m, i) => `L=${links[i]}, ${m}`);
  const entries: Array<{ label: string; style: LineStyle }> = [];
  let si = 0;
  for (const [key, idx] of groupIndices(keys)) {
    const style = styleFor(si++);
    const order = idx.slice().sort((a, b) => counts[a]! - counts[b]!);
    const pts = order.map((i): [number, number] => [fr.x(logp[i]!), fr.y(rates[i]!)]);
    body.push(polyline(pts, style));
    for (const [x, y] of pts) body.push(circle(x, y, 2.6, style.stroke));
    entries.push({ label: key, style });
  }
  body.push(...legend(fr, entries));
  return document(body);
}

// ── array factor cuts ─────────────────────────────────────────────────────

const DEG = 180 / Math.PI;

/** Normalized pattern in dB against azimuth, one curve per link id, with the
 *  0 dB peak dotted and the deepest dip's angle called out. */
export function renderAf(parsed: ParsedCsv): string {
  const theta = numberColumn(parsed, "theta_rad").map((t) => t * DEG);
  const level = numberColumn(parsed, "af_db");
  const ids = stringColumn(parsed, "link_id");
  const yExt = extentOf(level);
  const fr = frame({
    title: "surface pattern cuts",
    xLabel: "azimuth [deg]",
    yLabel: "normalized pattern [dB]",
    xDomain: extentOf(theta),
    yDomain: { min: yExt.min - 2, max: Math.max(yExt.max, 0) + 2 },
  });
  const body = [...fr.body];
  const entries: Array<{ label: string; style: LineStyle }> = [];
  let si = 0;
  let peakIdx = 0;
  let dipIdx = 0;
  level.forEach((v, i) => {
    if (v > level[peakIdx]!) peakIdx = i;
    if (v < level[dipIdx]!) dipIdx = i;
  });
  for (const [id, idx] of groupIndices(ids)) {
    const style = styleFor(si++);
    const order = idx.slice().sort((a, b) => theta[a]! - theta[b]!);
    const pts = order.map((i): [number, number] => [fr.x(theta[i]!), fr.y(level[i]!)]);
    body.push(polyline(pts, { ...style, width: 1.2 }));
    let lo = idx[0]!;
    for (const i of idx) if (level[i]! < level[lo]!) lo = i;
    entries.push({
      label: `${id} (min ${level[lo]!.toFixed(1)} dB @ ${theta[lo]!.toFixed(1)} deg)`,
      style,
    });
  }
  // global peak marker: patterns are normalized so the peak sits at 0 dB
  const pkX = fr.x(theta[peakIdx]!);
  const pkY = fr.y(level[peakIdx]!);
  body.push(circle(pkX, pkY, 4, "#111"));
  body.push(text(Math.min(pkX + 6, fr.plotRight - 80), pkY - 7, `${level[peakIdx]!.toFixed(1)} dB peak`, { size: 12 }));
  // deepest dip: vertical marker with the angle called out
  const dipX = fr.x(theta[dipIdx]!);
  body.push(line(dipX, fr.plotTop, dipX, fr.plotBottom, { stroke: "#666", width: 1, dash: "4 3" }));
  body.push(
    text(Math.min(dipX + 5, fr.plotRight - 120), fr.plotBottom - 8, `dip @ ${theta[dipIdx]!.toFixed(1)} deg`, {
      size: 12,
      fill: "#444",
    }),
  );
  body.push(...legend(fr, entries));
  return document(body);
}

// ── dispatch ──────────────────────────────────────────────────────────────

export function render(parsed: ParsedCsv): string {
  switch (parsed.kind) {
    case "convergence":
      return renderConvergence(parsed);
    case "sweep":
      return renderSweep(parsed);
    case "af":
      return renderAf(parsed);
  }
}
