/** Training objective: cross-entropy mixed with an attention-steering term,
 *
 *     L = alpha * CE(prediction, target) + beta * mean_i sum_j |a_ij - z_ij|
 *
 * with alpha + beta = 1. The L1 term uses no smoothing; its subgradient at
 * an exact zero difference is taken as 0.
 */

import { Mat, Tape } from "./autodiff.js";
import { LengthMismatch, MixingWeightsInvalid } from "./errors.js";

export function validateMixing(alpha: number, beta: number): void {
  if (!(alpha >= 0) || !(beta >= 0)) {
    throw new MixingWeightsInvalid(`weights must be nonnegative, got ${alpha}, ${beta}`);
  }
  if (Math.abs(alpha + beta - 1) > 1e-9) {
    throw new MixingWeightsInvalid(`weights must sum to 1, got ${alpha} + ${beta}`);
  }
}

/** Numeric form over plain arrays; `prediction` rows are probabilities. */
export function compositeLoss(
  prediction: number[][],
  target: number[],
  attention: number[][],
  zeta: ArrayLike<number>[],
  alpha: number,
  beta: number,
): number {
  validateMixing(alpha, beta);
  const m = prediction.length;
  if (target.length !== m || attention.length !== m || zeta.length !== m) {
    throw new LengthMismatch(
      `rows disagree: ${m} predictions, ${target.length} targets, ` +
        `${attention.length} attention rows, ${zeta.length} zeta rows`,
    );
  }
  let ce = 0;
  let hcau = 0;
  for (let i = 0; i < m; i++) {
    if (attention[i].length !== zeta[i].length) {
      throw new LengthMismatch(
        `row ${i}: attention has ${attention[i].length} steps, zeta ${zeta[i].length}`,
      );
    }
    ce += -Math.log(prediction[i][target[i]]);
    let s = 0;
    for (let j = 0; j < attention[i].length; j++) {
      s += Math.abs(attention[i][j] - zeta[i][j]);
    }
    hcau += s;
  }
  return (alpha * ce) / m + (beta * hcau) / m;
}

/** Graph form used by the training loop; differentiable via the tape. */
export function compositeLossNode(
  tape: Tape,
  logits: Mat,
  targets: ArrayLike<number>,
  attention: Mat,
  zeta: ArrayLike<number>[],
  alpha: number,
  beta: number,
): Mat {
  validateMixing(alpha, beta);
  if (zeta.length !== attention.rows) {
    throw new LengthMismatch(`${attention.rows} attention rows, ${zeta.length} zeta rows`);
  }
  const z = new Mat(attention.rows, attention.cols);
  for (let i = 0; i < zeta.length; i++) {
    if (zeta[i].length !== attention.cols) {
      throw new LengthMismatch(
        `row ${i}: attention has ${attention.cols} steps, zeta ${zeta[i].length}`,
      );
    }
    for (let j = 0; j < attention.cols; j++) z.data[i * attention.cols + j] = zeta[i][j];
  }
  const ce = tape.meanNll(logits, targets);
  const hcau = tape.l1diff(attention, z);
  return tape.add(tape.scale(ce, alpha), tape.scale(hcau, beta / attention.rows));
}

/** Mean per-row L1 distance between attention and zeta (the steering term). */
export function meanHcau(attention: number[][], zeta: ArrayLike<number>[]): number {
  if (attention.length !== zeta.length) {
    throw new LengthMismatch(`${attention.length} attention rows, ${zeta.length} zeta rows`);
  }
  let total = 0;
  for (let i = 0; i < attention.length; i++) {
    if (attention[i].length !== zeta[i].length) {
      throw new LengthMismatch(
        `row ${i}: attention has ${attention[i].length} steps, zeta ${zeta[i].length}`,
      );
    }
    for (let j = 0; j < attention[i].length; j++) {
      total += Math.abs(attention[i][j] - zeta[i][j]);
    }
  }
  return total / attention.length;
}
