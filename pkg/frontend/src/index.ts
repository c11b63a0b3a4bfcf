export { Mat, Tape, zeroGrads } from "./autodiff.js";
export {
  detectDelimiter,
  loadSeriesFile,
  loadStrengths,
  metricsToCsv,
  parseSeriesFile,
  parseStrengths,
  zetaFor,
} from "./data.js";
export type { EpochMetrics, SeriesSet, StrengthsFile } from "./data.js";
export {
  LengthMismatch,
  MissingStrengths,
  MixingWeightsInvalid,
  ParseError,
  ShapeMismatch,
} from "./errors.js";
export { compositeLoss, compositeLossNode, meanHcau, validateMixing } from "./loss.js";
export { accuracy, macroF1 } from "./metrics.js";
export { AttentionParams, attentionForward } from "./model.js";
export type { ForwardResult, ModelConfig } from "./model.js";
export { Adam } from "./optim.js";
export { Rng } from "./rng.js";
export { evaluate, train } from "./train.js";
export type { TrainedModel, TrainingConfig } from "./train.js";
