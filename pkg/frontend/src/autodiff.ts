/** Reverse-mode autodiff over float64 matrices.
 *
 * A Mat holds values and a gradient buffer; a Tape records one closure per
 * op and replays them in reverse. Everything is double precision on
 * purpose: the gradient checks in the test suite compare against central
 * finite differences at 1e-4 relative tolerance, which float32 cannot meet.
 */

import { ShapeMismatch } from "./errors.js";

export class Mat {
  readonly rows: number;
  readonly cols: number;
  readonly data: Float64Array;
  readonly grad: Float64Array;

  constructor(rows: number, cols: number, data?: Float64Array) {
    this.rows = rows;
    this.cols = cols;
    this.data = data ?? new Float64Array(rows * cols);
    this.grad = new Float64Array(rows * cols);
  }

  get(i: number, j: number): number {
    return this.data[i * this.cols + j];
  }

  set(i: number, j: number, v: number): void {
    this.data[i * this.cols + j] = v;
  }

  static from(values: number[][]): Mat {
    const rows = values.length;
    const cols = values[0].length;
    const out = new Mat(rows, cols);
    for (let i = 0; i < rows; i++) {
      for (let j = 0; j < cols; j++) out.data[i * cols + j] = values[i][j];
    }
    return out;
  }

  static fromRow(values: ArrayLike<number>): Mat {
    const out = new Mat(1, values.length);
    out.data.set(values as Float64Array);
    return out;
  }

  toArrays(): number[][] {
    const out: number[][] = [];
    for (let i = 0; i < this.rows; i++) {
      out.push(Array.from(this.data.subarray(i * this.cols, (i + 1) * this.cols)));
    }
    return out;
  }
}

function sameShape(a: Mat, b: Mat, op: string): void {
  if (a.rows !== b.rows || a.cols !== b.cols) {
    throw new ShapeMismatch(
      `${op}: ${a.rows}x${a.cols} vs ${b.rows}x${b.cols}`,
    );
  }
}

export class Tape {
  private steps: Array<() => void> = [];

  private record(step: () => void): void {
    this.steps.push(step);
  }

  /** Seed d(loss)/d(loss) = 1 and replay all recorded ops in reverse. */
  backward(loss: Mat): void {
    if (loss.rows !== 1 || loss.cols !== 1) {
      throw new ShapeMismatch(`backward needs a scalar, got ${loss.rows}x${loss.cols}`);
    }
    loss.grad[0] = 1;
    for (let i = this.steps.length - 1; i >= 0; i--) this.steps[i]();
  }

  matmul(a: Mat, b: Mat): Mat {
    if (a.cols !== b.rows) {
      throw new ShapeMismatch(`matmul: ${a.rows}x${a.cols} by ${b.rows}x${b.cols}`);
    }
    const out = new Mat(a.rows, b.cols);
    for (let i = 0; i < a.rows; i++) {
      for (let k = 0; k < a.cols; k++) {
        const av = a.data[i * a.cols + k];
        if (av === 0) continue;
        for (let j = 0; j < b.cols; j++) {
          out.data[i * b.cols + j] += av * b.data[k * b.cols + j];
        }
      }
    }
    this.record(() => {
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < b.cols; j++) {
          const g = out.grad[i * b.cols + j];
          if (g === 0) continue;
          for (let k = 0; k < a.cols; k++) {
            a.grad[i * a.cols + k] += g * b.data[k * b.cols + j];
            b.grad[k * b.cols + j] += g * a.data[i * a.cols + k];
          }
        }
      }
    });
    return out;
  }

  add(a: Mat, b: Mat): Mat {
    sameShape(a, b, "add");
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] + b.data[i];
    this.record(() => {
      for (let i = 0; i < out.data.length; i++) {
        a.grad[i] += out.grad[i];
        b.grad[i] += out.grad[i];
      }
    });
    return out;
  }

  /** Add a 1-row bias to every row. */
  addRow(a: Mat, v: Mat): Mat {
    if (v.rows !== 1 || v.cols !== a.cols) {
      throw new ShapeMismatch(`addRow: ${a.rows}x${a.cols} plus ${v.rows}x${v.cols}`);
    }
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < a.cols; j++) {
        out.data[i * a.cols + j] = a.data[i * a.cols + j] + v.data[j];
      }
    }
    this.record(() => {
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < a.cols; j++) {
          const g = out.grad[i * a.cols + j];
          a.grad[i * a.cols + j] += g;
          v.grad[j] += g;
        }
      }
    });
    return out;
  }

  mul(a: Mat, b: Mat): Mat {
    sameShape(a, b, "mul");
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] * b.data[i];
    this.record(() => {
      for (let i = 0; i < out.data.length; i++) {
        a.grad[i] += out.grad[i] * b.data[i];
        b.grad[i] += out.grad[i] * a.data[i];
      }
    });
    return out;
  }

  /** Scale every row i of `a` by column vector entry v[i]. */
  mulCol(a: Mat, v: Mat): Mat {
    if (v.cols !== 1 || v.rows !== a.rows) {
      throw new ShapeMismatch(`mulCol: ${a.rows}x${a.cols} by ${v.rows}x${v.cols}`);
    }
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < a.rows; i++) {
      const s = v.data[i];
      for (let j = 0; j < a.cols; j++) {
        out.data[i * a.cols + j] = a.data[i * a.cols + j] * s;
      }
    }
    this.record(() => {
      for (let i = 0; i < a.rows; i++) {
        const s = v.data[i];
        let acc = 0;
        for (let j = 0; j < a.cols; j++) {
          const g = out.grad[i * a.cols + j];
          a.grad[i * a.cols + j] += g * s;
          acc += g * a.data[i * a.cols + j];
        }
        v.grad[i] += acc;
      }
    });
    return out;
  }

  tanh(a: Mat): Mat {
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < out.data.length; i++) out.data[i] = Math.tanh(a.data[i]);
    this.record(() => {
      for (let i = 0; i < out.data.length; i++) {
        a.grad[i] += out.grad[i] * (1 - out.data[i] * out.data[i]);
      }
    });
    return out;
  }

  sigmoid(a: Mat): Mat {
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < out.data.length; i++) {
      out.data[i] = 1 / (1 + Math.exp(-a.data[i]));
    }
    this.record(() => {
      for (let i = 0; i < out.data.length; i++) {
        const y = out.data[i];
        a.grad[i] += out.grad[i] * y * (1 - y);
      }
    });
    return out;
  }

  scale(a: Mat, k: number): Mat {
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < out.data.length; i++) out.data[i] = a.data[i] * k;
    this.record(() => {
      for (let i = 0; i < out.data.length; i++) a.grad[i] += out.grad[i] * k;
    });
    return out;
  }

  /** Columns [c0, c1) of `a` as a new matrix. */
  block(a: Mat, c0: number, c1: number): Mat {
    if (c0 < 0 || c1 > a.cols || c0 >= c1) {
      throw new ShapeMismatch(`block [${c0}, ${c1}) of ${a.rows}x${a.cols}`);
    }
    const w = c1 - c0;
    const out = new Mat(a.rows, w);
    for (let i = 0; i < a.rows; i++) {
      for (let j = 0; j < w; j++) {
        out.data[i * w + j] = a.data[i * a.cols + c0 + j];
      }
    }
    this.record(() => {
      for (let i = 0; i < a.rows; i++) {
        for (let j = 0; j < w; j++) {
          a.grad[i * a.cols + c0 + j] += out.grad[i * w + j];
        }
      }
    });
    return out;
  }

  /** Glue same-height matrices side by side. */
  concatCols(parts: Mat[]): Mat {
    const rows = parts[0].rows;
    let cols = 0;
    for (const p of parts) {
      if (p.rows !== rows) throw new ShapeMismatch("concatCols: row mismatch");
      cols += p.cols;
    }
    const out = new Mat(rows, cols);
    let off = 0;
    for (const p of parts) {
      for (let i = 0; i < rows; i++) {
        for (let j = 0; j < p.cols; j++) {
          out.data[i * cols + off + j] = p.data[i * p.cols + j];
        }
      }
      off += p.cols;
    }
    this.record(() => {
      let o = 0;
      for (const p of parts) {
        for (let i = 0; i < rows; i++) {
          for (let j = 0; j < p.cols; j++) {
            p.grad[i * p.cols + j] += out.grad[i * cols + o + j];
          }
        }
        o += p.cols;
      }
    });
    return out;
  }

  /** Row-wise softmax. */
  softmaxRows(a: Mat): Mat {
    const out = new Mat(a.rows, a.cols);
    for (let i = 0; i < a.rows; i++) {
      let mx = -Infinity;
      for (let j = 0; j < a.cols; j++) mx = Math.max(mx, a.data[i * a.cols + j]);
      let z = 0;
      for (let j = 0; j < a.cols; j++) {
        const e = Math.exp(a.data[i * a.cols + j] - mx);
        out.data[i * a.cols + j] = e;
        z += e;
      }
      for (let j = 0; j < a.cols; j++) out.data[i * a.cols + j] /= z;
    }
    this.record(() => {
      for (let i = 0; i < a.rows; i++) {
        let dot = 0;
        for (let j = 0; j < a.cols; j++) {
          dot += out.grad[i * a.cols + j] * out.data[i * a.cols + j];
        }
        for (let j = 0; j < a.cols; j++) {
          const p = out.data[i * a.cols + j];
          a.grad[i * a.cols + j] += p * (out.grad[i * a.cols + j] - dot);
        }
      }
    });
    return out;
  }

  sum(a: Mat): Mat {
    const out = new Mat(1, 1);
    let s = 0;
    for (let i = 0; i < a.data.length; i++) s += a.data[i];
    out.data[0] = s;
    this.record(() => {
      for (let i = 0; i < a.data.length; i++) a.grad[i] += out.grad[0];
    });
    return out;
  }

  /** Mean negative log-likelihood of integer targets under row logits. */
  meanNll(logits: Mat, targets: ArrayLike<number>): Mat {
    if (targets.length !== logits.rows) {
      throw new ShapeMismatch(`meanNll: ${logits.rows} rows, ${targets.length} targets`);
    }
    const m = logits.rows;
    const k = logits.cols;
    const probs = new Float64Array(m * k);
    const out = new Mat(1, 1);
    let total = 0;
    for (let i = 0; i < m; i++) {
      let mx = -Infinity;
      for (let j = 0; j < k; j++) mx = Math.max(mx, logits.data[i * k + j]);
      let z = 0;
      for (let j = 0; j < k; j++) z += Math.exp(logits.data[i * k + j] - mx);
      const logZ = mx + Math.log(z);
      for (let j = 0; j < k; j++) {
        probs[i * k + j] = Math.exp(logits.data[i * k + j] - logZ);
      }
      total += logZ - logits.data[i * k + targets[i]];
    }
    out.data[0] = total / m;
    this.record(() => {
      const g = out.grad[0] / m;
      for (let i = 0; i < m; i++) {
        for (let j = 0; j < k; j++) {
          const onehot = j === targets[i] ? 1 : 0;
          logits.grad[i * k + j] += g * (probs[i * k + j] - onehot);
        }
      }
    });
    return out;
  }

  /** Sum of |a - z| with z constant; subgradient at zero difference is 0. */
  l1diff(a: Mat, z: Mat): Mat {
    sameShape(a, z, "l1diff");
    const out = new Mat(1, 1);
    let s = 0;
    for (let i = 0; i < a.data.length; i++) s += Math.abs(a.data[i] - z.data[i]);
    out.data[0] = s;
    this.record(() => {
      for (let i = 0; i < a.data.length; i++) {
        const d = a.data[i] - z.data[i];
        if (d > 0) a.grad[i] += out.grad[0];
        else if (d < 0) a.grad[i] -= out.grad[0];
      }
    });
    return out;
  }
}

export function zeroGrads(params: Iterable<Mat>): void {
  for (const p of params) p.grad.fill(0);
}
