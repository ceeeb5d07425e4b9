export {
  parseTagged,
  splitRecords,
  numberColumn,
  stringColumn,
  SchemaError,
  REQUIRED_COLUMNS,
  TAG_FOR_KIND,
  type FigureKind,
  type ParsedCsv,
} from "./csv.js";
export { render, renderConvergence, renderSweep, renderAf } from "./charts.js";
export { main } from "./cli.js";
