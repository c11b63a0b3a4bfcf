/** Encoder-attention classifier.
 *
 * A stacked LSTM reads the series; the final hidden state plays the role
 * of the decoder state for a single output step. Each encoder step j is
 * scored against it,
 *
 *     e_j = v . tanh(W h_j + U q + b),     a = softmax(e),
 *
 * the context vector is the attention-weighted sum of encoder states, and
 * a fully connected layer turns the context into class logits. Attention
 * therefore has exactly one coefficient per time step, the same index set
 * as the per-timestep strength vectors it gets steered toward.
 */

import { Mat, Tape } from "./autodiff.js";
import { ShapeMismatch } from "./errors.js";
import { Rng } from "./rng.js";

export interface ModelConfig {
  width: number;
  layers: number;
  classes: number;
}

interface LstmLayer {
  wx: Mat; // [in x 4H], gate order i, f, g, o
  wh: Mat; // [H x 4H]
  b: Mat; // [1 x 4H]
}

export class AttentionParams {
  readonly config: ModelConfig;
  readonly lstm: LstmLayer[];
  readonly scoreW: Mat; // [H x H]
  readonly scoreU: Mat; // [H x H]
  readonly scoreB: Mat; // [1 x H]
  readonly scoreV: Mat; // [H x 1]
  readonly headW: Mat; // [H x K]
  readonly headB: Mat; // [1 x K]

  constructor(config: ModelConfig, seed: number) {
    this.config = config;
    const rng = new Rng(seed);
    const h = config.width;
    const init = (rows: number, cols: number, r: number): Mat => {
      const m = new Mat(rows, cols);
      for (let i = 0; i < m.data.length; i++) m.data[i] = rng.uniform(-r, r);
      return m;
    };
    this.lstm = [];
    for (let l = 0; l < config.layers; l++) {
      const fanIn = l === 0 ? 1 : h;
      this.lstm.push({
        wx: init(fanIn, 4 * h, 1 / Math.sqrt(fanIn)),
        wh: init(h, 4 * h, 1 / Math.sqrt(h)),
        b: new Mat(1, 4 * h),
      });
    }
    this.scoreW = init(h, h, 1 / Math.sqrt(h));
    this.scoreU = init(h, h, 1 / Math.sqrt(h));
    this.scoreB = new Mat(1, h);
    this.scoreV = init(h, 1, 1 / Math.sqrt(h));
    this.headW = init(h, config.classes, 1 / Math.sqrt(h));
    this.headB = new Mat(1, config.classes);
  }

  all(): Mat[] {
    const out: Mat[] = [];
    for (const layer of this.lstm) out.push(layer.wx, layer.wh, layer.b);
    out.push(this.scoreW, this.scoreU, this.scoreB, this.scoreV);
    out.push(this.headW, this.headB);
    return out;
  }
}

export interface ForwardResult {
  /** Class probabilities, one row per series. */
  prediction: number[][];
  /** Attention coefficients, one row per series, one column per step. */
  attention: number[][];
  /** Context vectors, one row per series. */
  context: number[][];
  /** Graph nodes for training. */
  logitsNode: Mat;
  attentionNode: Mat;
  tape: Tape;
}

function lstmStep(
  tape: Tape,
  layer: LstmLayer,
  x: Mat,
  h: Mat,
  c: Mat,
  width: number,
): { h: Mat; c: Mat } {
  const z = tape.addRow(
    tape.add(tape.matmul(x, layer.wx), tape.matmul(h, layer.wh)),
    layer.b,
  );
  const i = tape.sigmoid(tape.block(z, 0, width));
  const f = tape.sigmoid(tape.block(z, width, 2 * width));
  const g = tape.tanh(tape.block(z, 2 * width, 3 * width));
  const o = tape.sigmoid(tape.block(z, 3 * width, 4 * width));
  const cNext = tape.add(tape.mul(f, c), tape.mul(i, g));
  const hNext = tape.mul(o, tape.tanh(cNext));
  return { h: hNext, c: cNext };
}

export function attentionForward(
  batch: ArrayLike<number>[],
  params: AttentionParams,
  tape: Tape = new Tape(),
): ForwardResult {
  if (batch.length === 0) throw new ShapeMismatch("empty batch");
  const steps = batch[0].length;
  if (steps === 0) throw new ShapeMismatch("zero-length series");
  for (const row of batch) {
    if (row.length !== steps) {
      throw new ShapeMismatch(`series lengths differ: ${row.length} vs ${steps}`);
    }
  }
  const b = batch.length;
  const width = params.config.width;

  // Per-step inputs as [b x 1] constants.
  let inputs: Mat[] = [];
  for (let t = 0; t < steps; t++) {
    const x = new Mat(b, 1);
    for (let i = 0; i < b; i++) x.data[i] = batch[i][t];
    inputs.push(x);
  }

  let top: Mat[] = inputs;
  for (const layer of params.lstm) {
    let h = new Mat(b, width);
    let c = new Mat(b, width);
    const out: Mat[] = [];
    for (let t = 0; t < steps; t++) {
      const next = lstmStep(tape, layer, top[t], h, c, width);
      h = next.h;
      c = next.c;
      out.push(h);
    }
    top = out;
  }

  // The last encoder state stands in for the decoder state at its single
  // output step.
  const query = top[steps - 1];
  const queryTerm = tape.matmul(query, params.scoreU);
  const scores: Mat[] = [];
  for (let t = 0; t < steps; t++) {
    const s = tape.tanh(
      tape.addRow(tape.add(tape.matmul(top[t], params.scoreW), queryTerm), params.scoreB),
    );
    scores.push(tape.matmul(s, params.scoreV)); // [b x 1]
  }
  const attention = tape.softmaxRows(tape.concatCols(scores)); // [b x steps]

  let context: Mat | null = null;
  for (let t = 0; t < steps; t++) {
    const weighted = tape.mulCol(top[t], tape.block(attention, t, t + 1));
    context = context === null ? weighted : tape.add(context, weighted);
  }

  const logits = tape.addRow(tape.matmul(context!, params.headW), params.headB);
  const prediction = tape.softmaxRows(logits);

  return {
    prediction: prediction.toArrays(),
    attention: attention.toArrays(),
    context: context!.toArrays(),
    logitsNode: logits,
    attentionNode: attention,
    tape,
  };
}
