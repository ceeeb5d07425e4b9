/** Shared builders for tagged-CSV fixtures, CRLF throughout. */

import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "risfig-"));
}

export function csvText(tag: string, header: string[], rows: string[][]): string {
  const lines = [tag, header.join(","), ...rows.map((r) => r.join(","))];
  return lines.join("\r\n") + "\r\n";
}

export function writeCsv(dir: string, name: string, content: string): string {
  const p = join(dir, name);
  writeFileSync(p, content, "utf8");
  return p;
}

export const TRACE_HEADER = [
  "iteration",
  "mode",
  "sum_rate_bits",
  "sum_rate_internal_bits",
  "wmse",
  "mu_1",
  "mu_2",
  "delta_norm_1",
  "delta_norm_2",
];

export function traceCsv(): string {
  const rows = [
    ["0", "mca", "0.01", "0.01", "3.2", "1.0", "1.0", "0.0", "0.0"],
    ["1", "mca", "0.02", "0.02", "3.0", "0.9", "1.1", "0.5", "0.4"],
    ["2", "mca", "0.05", "0.05", "2.7", "0.8", "1.2", "0.5", "0.5"],
    ["0", "mcu", "0.01", "0.01", "3.2", "1.0", "1.0", "0.0", "0.0"],
    ["1", "mcu", "0.015", "0.016", "3.1", "0.95", "1.05", "0.4", "0.4"],
    ["2", "mcu", "0.03", "0.031", "2.9", "0.9", "1.1", "0.5", "0.5"],
  ];
  return csvText("# risopt-trace v1", TRACE_HEADER, rows);
}

export const SWEEP_HEADER = ["L", "d", "P", "mode", "sum_rate_bits"];

export function sweepCsv(rows?: string[][]): string {
  const defaults = [
    ["2", "0.002675", "4", "mca", "0.11"],
    ["2", "0.0013375", "16", "mca", "0.21"],
    ["2", "0.00066875", "64", "mca", "0.33"],
    ["2", "0.002675", "4", "mcu", "0.10"],
    ["2", "0.0013375", "16", "mcu", "0.19"],
    ["2", "0.00066875", "64", "mcu", "0.30"],
    ["3", "0.0013375", "16", "mca", "0.27"],
    ["3", "0.00066875", "64", "mca", "0.41"],
  ];
  return csvText("# risopt-sweep v1", SWEEP_HEADER, rows ?? defaults);
}

export const AF_HEADER = ["theta_rad", "af_db", "link_id"];

export function afCsv(): string {
  const rows: string[][] = [];
  for (const link of ["ris1:tx0", "ris1:tx1"]) {
    for (let i = 0; i <= 36; i++) {
      const t = (i / 36) * 2 * Math.PI;
      const shift = link.endsWith("0") ? 0.7 : 2.1;
      const db = -22 * Math.abs(Math.sin(t - shift));
      rows.push([String(t), db.toFixed(6), link]);
    }
  }
  return csvText("# risopt-af v1", AF_HEADER, rows);
}
