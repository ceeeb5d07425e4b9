/**
 * Tagged-CSV reader for the risopt harness artifacts.
 *
 * Every artifact starts with a tag line `# risopt-<kind> v1`, followed by an
 * RFC-4180 body (CRLF records, optional quoting). The reader validates the
 * tag, the header columns, and the per-row field counts before handing rows
 * to a renderer, so schema problems surface as one diagnostic instead of a
 * half-drawn figure.
 */

import { readFileSync } from "node:fs";

export type FigureKind = "convergence" | "sweep" | "af";

/** CSV tag names as written by the producing harness, keyed by figure kind. */
export const TAG_FOR_KIND: Record<FigureKind, string> = {
  convergence: "trace",
  sweep: "sweep",
  af: "af",
};

/** Columns that must be present, in order, at the front of the header. */
export const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  convergence: ["iteration", "mode", "sum_rate_bits", "sum_rate_internal_bits", "wmse"],
  sweep: ["L", "d", "P", "mode", "sum_rate_bits"],
  af: ["theta_rad", "af_db", "link_id"],
};

export interface ParsedCsv {
  kind: FigureKind;
  header: string[];
  rows: string[][];
}

/** Raised for any structural problem: bad tag, bad header, ragged rows. */
export class SchemaError extends Error {
  override name = "SchemaError";
}

// ── low-level record parsing ──────────────────────────────────────────────

/**
 * Split RFC-4180 text into records of fields. Handles quoted fields with
 * embedded separators, doubled quotes, and both CRLF and LF record ends.
 */
export function splitRecords(text: string): string[][] {
  const records: string[][] = [];
  let field = "";
  let record: string[] = [];
  let quoted = false;
  let i = 0;
  const push = () => {
    record.push(field);
    field = "";
  };
  const endRecord = () => {
    push();
    records.push(record);
    record = [];
  };
  while (i < text.length) {
    const c = text[i]!;
    if (quoted) {
      if (c === '"') {
        if (text[i + 1] === '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
        i += 1;
        continue;
      }
      field += c;
      i += 1;
      continue;
    }
    if (c === '"' && field.length === 0) {
      quoted = true;
      i += 1;
      continue;
    }
    if (c === ",") {
      push();
      i += 1;
      continue;
    }
    if (c === "\r" && text[i + 1] === "\n") {
      endRecord();
      i += 2;
      continue;
    }
    if (c === "\n") {
      endRecord();
      i += 1;
      continue;
    }
    field += c;
    i += 1;
  }
  if (quoted) {
    throw new SchemaError("unterminated quoted field at end of input");
  }
  if (field.length > 0 || record.length > 0) {
    endRecord();
  }
  // trailing CRLF on the last data line produces one empty record; drop it
  return records.filter((r) => !(r.length === 1 && r[0] === ""));
}

// ── schema validation ─────────────────────────────────────────────────────

function checkHeader(kind: FigureKind, header: string[]): void {
  const required = REQUIRED_COLUMNS[kind];
  const missing = required.filter((c) => !header.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(
      `${kind} header is missing column(s) [${missing.join(", ")}]; ` +
        `required [${required.join(", ")}], got [${header.join(", ")}]`,
    );
  }
  const misplaced = required.filter((c, j) => header[j] !== c);
  if (misplaced.length > 0) {
    throw new SchemaError(
      `${kind} header has column(s) [${misplaced.join(", ")}] out of position; ` +
        `expected the header to start with [${required.join(", ")}], got [${header.join(", ")}]`,
    );
  }
}

/**
 * Parse a tagged artifact and validate it against the declared kind.
 * Returns the header and raw string rows; numeric narrowing happens in
 * the column accessors below so error messages can name the column.
 */
export function parseTagged(path: string, kind: FigureKind): ParsedCsv {
  const text = readFileSync(path, "utf8");
  const records = splitRecords(text);
  if (records.length === 0) {
    throw new SchemaError(`${path}: empty file, expected a '# risopt-<kind> v1' tag line`);
  }
  const tagLine = records[0]!.join(",").trim();
  const wanted = `# risopt-${TAG_FOR_KIND[kind]} v1`;
  if (tagLine !== wanted) {
    throw new SchemaError(`${path}: tag line ${JSON.stringify(tagLine)} does not match ${JSON.stringify(wanted)}`);
  }
  if (records.length < 2) {
    throw new SchemaError(`${path}: missing header row after the tag line`);
  }
  const header = records[1]!;
  checkHeader(kind, header);
  const rows = records.slice(2);
  rows.forEach((row, idx) => {
    if (row.length !== header.length) {
      throw new SchemaError(
        `${path}: row ${idx + 1} has ${row.length} field(s), header declares ${header.length}`,
      );
    }
  });
  if (rows.length === 0) {
    throw new SchemaError(`${path}: no data rows`);
  }
  return { kind, header, rows };
}

// ── typed column access ───────────────────────────────────────────────────

function columnIndex(parsed: ParsedCsv, name: string): number {
  const j = parsed.header.indexOf(name);
  if (j < 0) {
    throw new SchemaError(`column ${JSON.stringify(name)} not present in [${parsed.header.join(", ")}]`);
  }
  return j;
}

/** Column of finite floats; a non-numeric cell names the column and row. */
export function numberColumn(parsed: ParsedCsv, name: string): number[] {
  const j = columnIndex(parsed, name);
  return parsed.rows.map((row, idx) => {
    const value = Number(row[j]);
    if (!Number.isFinite(value)) {
      throw new SchemaError(
        `column ${JSON.stringify(name)}, row ${idx + 1}: ${JSON.stringify(row[j])} is not a finite number`,
      );
    }
    return value;
  });
}

/** Column kept as raw strings (mode labels, link ids). */
export function stringColumn(parsed: ParsedCsv, name: string): string[] {
  const j = columnIndex(parsed, name);
  return parsed.rows.map((row) => row[j]!);
}
