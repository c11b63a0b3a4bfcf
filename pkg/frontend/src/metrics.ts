import { LengthMismatch } from "./errors.js";

export function accuracy(predicted: number[], actual: number[]): number {
  if (predicted.length !== actual.length) {
    throw new LengthMismatch(`${predicted.length} predictions vs ${actual.length} labels`);
  }
  if (actual.length === 0) throw new LengthMismatch("no rows to score");
  let hits = 0;
  for (let i = 0; i < actual.length; i++) hits += predicted[i] === actual[i] ? 1 : 0;
  return hits / actual.length;
}

/** Macro F1 over the classes present in `actual`; a silent class scores 0. */
export function macroF1(predicted: number[], actual: number[]): number {
  if (predicted.length !== actual.length) {
    throw new LengthMismatch(`${predicted.length} predictions vs ${actual.length} labels`);
  }
  if (actual.length === 0) throw new LengthMismatch("no rows to score");
  const classes = Array.from(new Set(actual)).sort((a, b) => a - b);
  let total = 0;
  for (const c of classes) {
    let tp = 0;
    let fp = 0;
    let fn = 0;
    for (let i = 0; i < actual.length; i++) {
      if (predicted[i] === c && actual[i] === c) tp++;
      else if (predicted[i] === c) fp++;
      else if (actual[i] === c) fn++;
    }
    const denom = 2 * tp + fp + fn;
    total += denom === 0 ? 0 : (2 * tp) / denom;
  }
  return total / classes.length;
}
