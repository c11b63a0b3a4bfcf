export class ShapeMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ShapeMismatch";
  }
}

export class LengthMismatch extends Error {
  constructor(message: string) {
    super(message);
    this.name = "LengthMismatch";
  }
}

export class MixingWeightsInvalid extends Error {
  constructor(message: string) {
    super(message);
    this.name = "MixingWeightsInvalid";
  }
}

export class MissingStrengths extends Error {
  /** Series ids present in the dataset but absent from the strengths file. */
  readonly ids: string[];

  constructor(ids: string[]) {
    super(`no strengths for series: ${ids.join(", ")}`);
    this.name = "MissingStrengths";
    this.ids = ids;
  }
}

export class ParseError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ParseError";
  }
}
