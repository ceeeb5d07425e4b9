#!/usr/bin/env node
/**
 * risfig: render a tagged risopt CSV artifact to a static SVG figure.
 *
 *   risfig plot --in trace.csv --kind convergence --out trace.svg
 *
 * Exit codes: 0 on success, 2 on usage or schema errors. Schema errors
 * print column-level diagnostics to stderr and leave the output untouched.
 */

import { parseArgs } from "node:util";
import { realpathSync, writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { parseTagged, SchemaError, type FigureKind } from "./csv.js";
import { render } from "./charts.js";

const KINDS: FigureKind[] = ["convergence", "sweep", "af"];

const USAGE = `usage: risfig plot --in <artifact.csv> --kind <${KINDS.join("|")}> --out <figure.svg>`;

export function main(argv: string[]): number {
  let parsedArgs;
  try {
    parsedArgs = parseArgs({
      args: argv,
      allowPositionals: true,
      options: {
        in: { type: "string" },
        kind: { type: "string" },
        out: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
    });
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    console.error(USAGE);
    return 2;
  }
  const { values, positionals } = parsedArgs;
  if (values.help) {
    console.log(USAGE);
    return 0;
  }
  if (positionals.length !== 1 || positionals[0] !== "plot") {
    console.error(`expected the single subcommand 'plot', got [${positionals.join(", ")}]`);
    console.error(USAGE);
    return 2;
  }
  const missing = (["in", "kind", "out"] as const).filter((k) => !values[k]);
  if (missing.length > 0) {
    console.error(`missing required option(s): ${missing.map((m) => `--${m}`).join(", ")}`);
    console.error(USAGE);
    return 2;
  }
  const kind = values.kind as string;
  if (!KINDS.includes(kind as FigureKind)) {
    console.error(`unknown kind ${JSON.stringify(kind)}; expected one of ${KINDS.join(", ")}`);
    return 2;
  }
  let svg: string;
  try {
    const parsed = parseTagged(values.in as string, kind as FigureKind);
    svg = render(parsed);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema mismatch: ${err.message}`);
      return 2;
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      console.error(`input not found: ${values.in}`);
      return 2;
    }
    throw err;
  }
  // render fully before touching the filesystem so failures leave no partial file
  writeFileSync(values.out as string, svg, "utf8");
  return 0;
}

// invoked as a script (bin shim or `node dist/cli.js ...`), not imported by tests
function invokedDirectly(): boolean {
  const entry = process.argv[1];
  if (!entry) return false;
  try {
    return realpathSync(entry) === fileURLToPath(import.meta.url);
  } catch {
    return false;
  }
}

if (invokedDirectly()) {
  process.exit(main(process.argv.slice(2)));
}
