/** File ingestion: delimited series files and the strengths JSON.
 *
 * Series files are label-first delimited text, one series per line, tab or
 * comma (tab wins when both appear). Parsed rows get ids "0", "1", ... in
 * file order, which is exactly how the mining CLI numbers them, so the ids
 * in a strengths file produced from the same data line up.
 */

import { readFileSync } from "node:fs";

import { MissingStrengths, ParseError } from "./errors.js";

export interface SeriesSet {
  /** One Float64Array per series, all the same length. */
  values: Float64Array[];
  /** Class index per series, 0..K-1 after sorted remapping. */
  labels: number[];
  /** Raw label value for each class index. */
  labelValues: number[];
  /** Row ids, "0".."n-1". */
  ids: string[];
}

export function detectDelimiter(text: string): string {
  if (text.includes("\t")) return "\t";
  if (text.includes(",")) return ",";
  throw new ParseError("no tab or comma delimiter found");
}

export function parseSeriesFile(text: string): SeriesSet {
  const delimiter = detectDelimiter(text);
  const rawLabels: number[] = [];
  const values: Float64Array[] = [];
  let width = -1;

  const lines = text.split("\n");
  for (let ln = 0; ln < lines.length; ln++) {
    const line = lines[ln].trim();
    if (line === "") continue;
    const fields = line.split(delimiter);
    if (fields.length < 2) {
      throw new ParseError(`line ${ln + 1}: need a label and at least one value`);
    }
    const numbers = fields.map((f, idx) => {
      const x = Number(f);
      if (!Number.isFinite(x) && f.trim().toLowerCase() !== "nan") {
        throw new ParseError(`line ${ln + 1}, field ${idx + 1}: bad number "${f}"`);
      }
      return x;
    });
    if (width === -1) width = numbers.length;
    if (numbers.length !== width) {
      throw new ParseError(
        `line ${ln + 1}: expected ${width} fields, found ${numbers.length}`,
      );
    }
    rawLabels.push(numbers[0]);
    values.push(Float64Array.from(numbers.slice(1)));
  }
  if (values.length === 0) throw new ParseError("no data rows");

  const labelValues = Array.from(new Set(rawLabels)).sort((a, b) => a - b);
  const index = new Map(labelValues.map((v, i) => [v, i] as const));
  const labels = rawLabels.map((v) => index.get(v)!);
  const ids = values.map((_, i) => String(i));
  return { values, labels, labelValues, ids };
}

export function loadSeriesFile(path: string): SeriesSet {
  return parseSeriesFile(readFileSync(path, "utf-8"));
}

export interface StrengthsFile {
  version: number;
  label: number | null;
  edges: Array<{ from: number; to: number; strength: number }>;
  zeta: Map<string, Float64Array>;
}

export function parseStrengths(text: string): StrengthsFile {
  let obj: any;
  try {
    obj = JSON.parse(text);
  } catch (e) {
    throw new ParseError(`strengths file is not JSON: ${(e as Error).message}`);
  }
  if (obj?.version !== 1) {
    throw new ParseError(`unsupported strengths version: ${obj?.version}`);
  }
  const zeta = new Map<string, Float64Array>();
  for (const [id, arr] of Object.entries(obj.zeta ?? {})) {
    if (!Array.isArray(arr)) throw new ParseError(`zeta for "${id}" is not an array`);
    zeta.set(id, Float64Array.from(arr as number[]));
  }
  return {
    version: obj.version,
    label: obj.label ?? null,
    edges: obj.edges ?? [],
    zeta,
  };
}

export function loadStrengths(path: string): StrengthsFile {
  return parseStrengths(readFileSync(path, "utf-8"));
}

/** The ζ vector for every id, in order; throws listing any absent ids. */
export function zetaFor(strengths: StrengthsFile, ids: string[]): Float64Array[] {
  const missing = ids.filter((id) => !strengths.zeta.has(id));
  if (missing.length > 0) throw new MissingStrengths(missing);
  return ids.map((id) => strengths.zeta.get(id)!);
}

export interface EpochMetrics {
  epoch: number;
  loss: number;
  accuracy: number;
  macroF1: number;
  meanHcau: number;
}

export function metricsToCsv(rows: EpochMetrics[]): string {
  const lines = ["epoch,loss,accuracy,macro_f1,mean_hcau"];
  for (const r of rows) {
    lines.push(`${r.epoch},${r.loss},${r.accuracy},${r.macroF1},${r.meanHcau}`);
  }
  return lines.join("\n") + "\n";
}
