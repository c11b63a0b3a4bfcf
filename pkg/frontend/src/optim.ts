import { Mat } from "./autodiff.js";

/** Plain Adam; state is keyed by parameter identity. */
export class Adam {
  private readonly lr: number;
  private readonly beta1: number;
  private readonly beta2: number;
  private readonly eps: number;
  private readonly m = new WeakMap<Mat, Float64Array>();
  private readonly v = new WeakMap<Mat, Float64Array>();
  private t = 0;

  constructor(lr: number, beta1 = 0.9, beta2 = 0.999, eps = 1e-8) {
    this.lr = lr;
    this.beta1 = beta1;
    this.beta2 = beta2;
    this.eps = eps;
  }

  step(params: Mat[]): void {
    this.t += 1;
    const c1 = 1 - Math.pow(this.beta1, this.t);
    const c2 = 1 - Math.pow(this.beta2, this.t);
    for (const p of params) {
      let m = this.m.get(p);
      let v = this.v.get(p);
      if (!m) {
        m = new Float64Array(p.data.length);
        v = new Float64Array(p.data.length);
        this.m.set(p, m);
        this.v.set(p, v!);
      }
      for (let i = 0; i < p.data.length; i++) {
        const g = p.grad[i];
        m[i] = this.beta1 * m[i] + (1 - this.beta1) * g;
        v![i] = this.beta2 * v![i] + (1 - this.beta2) * g * g;
        const mh = m[i] / c1;
        const vh = v![i] / c2;
        p.data[i] -= (this.lr * mh) / (Math.sqrt(vh) + this.eps);
      }
    }
  }
}
