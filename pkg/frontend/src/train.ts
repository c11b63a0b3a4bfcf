import { writeFileSync } from "node:fs";

import { Tape, zeroGrads } from "./autodiff.js";
import {
  EpochMetrics,
  loadSeriesFile,
  loadStrengths,
  metricsToCsv,
  zetaFor,
} from "./data.js";
import { LengthMismatch, ParseError } from "./errors.js";
import { compositeLoss, compositeLossNode, meanHcau } from "./loss.js";
import { validateMixing } from "./loss.js";
import { accuracy, macroF1 } from "./metrics.js";
import { AttentionParams, attentionForward } from "./model.js";
import { Adam } from "./optim.js";
import { Rng } from "./rng.js";

export interface TrainingConfig {
  alpha: number;
  beta: number;
  epochs: number;
  learningRate: number;
  batchSize: number;
  seed: number;
  /** Path to the strengths JSON exported by the mining pipeline. */
  strengthsFile: string;
  /** Hidden width; 128 unless overridden. */
  width?: number;
  /** Encoder depth; 2 unless overridden. */
  layers?: number;
  /** When set, per-epoch metrics are written here as CSV. */
  metricsFile?: string;
}

export interface TrainedModel {
  params: AttentionParams;
  /** Raw label value per class index, from the training file. */
  labelValues: number[];
  epochs: EpochMetrics[];
}

function argmaxRows(rows: number[][]): number[] {
  return rows.map((row) => {
    let best = 0;
    for (let j = 1; j < row.length; j++) if (row[j] > row[best]) best = j;
    return best;
  });
}

export function train(datasetFile: string, config: TrainingConfig): TrainedModel {
  validateMixing(config.alpha, config.beta);
  const data = loadSeriesFile(datasetFile);
  const strengths = loadStrengths(config.strengthsFile);
  const zeta = zetaFor(strengths, data.ids);
  const steps = data.values[0].length;
  for (let i = 0; i < zeta.length; i++) {
    if (zeta[i].length !== steps) {
      throw new LengthMismatch(
        `series ${data.ids[i]}: ${steps} steps but zeta has ${zeta[i].length}`,
      );
    }
  }

  const params = new AttentionParams(
    {
      width: config.width ?? 128,
      layers: config.layers ?? 2,
      classes: Math.max(data.labelValues.length, 2),
    },
    config.seed,
  );
  const adam = new Adam(config.learningRate);
  const rng = new Rng(config.seed ^ 0x5f3759df);
  const order = data.values.map((_, i) => i);
  const history: EpochMetrics[] = [];

  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    rng.shuffle(order);
    for (let at = 0; at < order.length; at += config.batchSize) {
      const idx = order.slice(at, at + config.batchSize);
      const tape = new Tape();
      const fwd = attentionForward(idx.map((i) => data.values[i]), params, tape);
      const loss = compositeLossNode(
        tape,
        fwd.logitsNode,
        idx.map((i) => data.labels[i]),
        fwd.attentionNode,
        idx.map((i) => zeta[i]),
        config.alpha,
        config.beta,
      );
      zeroGrads(params.all());
      tape.backward(loss);
      adam.step(params.all());
    }

    const full = attentionForward(data.values, params);
    const predicted = argmaxRows(full.prediction);
    history.push({
      epoch,
      loss: compositeLoss(
        full.prediction,
        data.labels,
        full.attention,
        zeta,
        config.alpha,
        config.beta,
      ),
      accuracy: accuracy(predicted, data.labels),
      macroF1: macroF1(predicted, data.labels),
      meanHcau: meanHcau(full.attention, zeta),
    });
  }

  if (config.metricsFile) {
    writeFileSync(config.metricsFile, metricsToCsv(history));
  }
  return { params, labelValues: data.labelValues, epochs: history };
}

export function evaluate(
  model: TrainedModel,
  testFile: string,
): { accuracy: number; macroF1: number } {
  const data = loadSeriesFile(testFile);
  const classOf = new Map(model.labelValues.map((v, i) => [v, i] as const));
  const actual = data.labels.map((c) => {
    const raw = data.labelValues[c];
    const mapped = classOf.get(raw);
    if (mapped === undefined) throw new ParseError(`label ${raw} never seen in training`);
    return mapped;
  });
  const fwd = attentionForward(data.values, model.params);
  const predicted = argmaxRows(fwd.prediction);
  return { accuracy: accuracy(predicted, actual), macroF1: macroF1(predicted, actual) };
}
