/** Builders shared by the test files: a linearly separable bump toy whose
 * discriminative window is known, so the planted per-timestep strengths
 * (uniform over the bump) are the "right" attention target.
 */

import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { Rng } from "../src/rng.js";

export const BUMP_START = 10;
export const BUMP_END = 18; // exclusive

export function bumpRow(rng: Rng, cls: number, steps: number): number[] {
  const vals: number[] = [];
  for (let t = 0; t < steps; t++) {
    let v = rng.normal() * 0.1;
    if (t >= BUMP_START && t < BUMP_END) v += cls === 0 ? 1.0 : -1.0;
    vals.push(v);
  }
  return vals;
}

export function plantedZeta(steps: number): number[] {
  const z = new Array(steps).fill(0);
  for (let t = BUMP_START; t < BUMP_END; t++) z[t] = 1 / (BUMP_END - BUMP_START);
  return z;
}

export interface ToyFiles {
  dir: string;
  dataFile: string;
  strengthsFile: string;
}

/** Write a labeled toy set plus a matching strengths file; rows alternate
 * classes. `flipFrom` marks the index where labels start coming out wrong
 * (the planted distractors). */
export function writeToy(
  name: string,
  seed: number,
  n: number,
  steps: number,
  flipFrom: number = Infinity,
  oddLabel?: string,
): ToyFiles {
  const rng = new Rng(seed);
  const lines: string[] = [];
  const zeta: Record<string, number[]> = {};
  for (let i = 0; i < n; i++) {
    const cls = i % 2;
    let label = (i >= flipFrom ? 1 - cls : cls) === 0 ? "1.0" : "2.0";
    if (i === 0 && oddLabel !== undefined) label = oddLabel;
    lines.push(`${label}\t${bumpRow(rng, cls, steps).join("\t")}`);
    zeta[String(i)] = plantedZeta(steps);
  }
  const dir = mkdtempSync(join(tmpdir(), `${name}-`));
  const dataFile = join(dir, `${name}.tsv`);
  writeFileSync(dataFile, lines.join("\n") + "\n");
  const strengthsFile = join(dir, `${name}.strengths.json`);
  writeFileSync(
    strengthsFile,
    JSON.stringify({ version: 1, label: null, edges: [], zeta }),
  );
  return { dir, dataFile, strengthsFile };
}
