/**
 * Classifier models the serve command can expose.
 *
 * `constant` replies with a fixed one-hot distribution (a protocol test
 * fixture), `linear` is a seeded linear-softmax model (deterministic,
 * self-contained), and `tfjs:<dir>` loads a saved Layers model from disk
 * and softmaxes its output if it is not already a distribution.
 */

export interface Classifier {
  readonly numClasses: number;
  readonly width: number;
  readonly height: number;
  readonly channels: 3;
  classify(pixels: Float32Array): Promise<number[]> | number[];
}

export interface ModelOptions {
  seed: number;
  classes: number;
  width: number;
  height: number;
}

/** Deterministic 32-bit PRNG (mulberry32), uniform in [0, 1). */
export function seededRandom(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function softmax(logits: number[]): number[] {
  const max = Math.max(...logits);
  const exps = logits.map(z => Math.exp(z - max));
  const total = exps.reduce((a, b) => a + b, 0);
  return exps.map(e => e / total);
}

export class ConstantModel implements Classifier {
  readonly channels = 3;

  constructor(
    readonly numClasses: number,
    readonly width: number,
    readonly height: number,
    private readonly hotClass = 0,
  ) {
    if (numClasses < 2) {
      throw new Error(`numClasses must be >= 2, got ${numClasses}`);
    }
    if (hotClass < 0 || hotClass >= numClasses) {
      throw new Error(`hotClass ${hotClass} outside [0, ${numClasses})`);
    }
  }

  classify(_pixels: Float32Array): number[] {
    const values = new Array<number>(this.numClasses).fill(0);
    values[this.hotClass] = 1;
    return values;
  }
}

export class SeededLinearModel implements Classifier {
  readonly channels = 3;
  private readonly weights: Float64Array;
  private readonly biases: Float64Array;

  constructor(
    readonly numClasses: number,
    readonly width: number,
    readonly height: number,
    seed: number,
  ) {
    if (numClasses < 2) {
      throw new Error(`numClasses must be >= 2, got ${numClasses}`);
    }
    const rand = seededRandom(seed);
    const inputs = width * height * 3;
    this.weights = new Float64Array(numClasses * inputs);
    for (let i = 0; i < this.weights.length; i++) {
      // scaled so logits stay O(1) regardless of image size
      this.weights[i] = (rand() * 2 - 1) / Math.sqrt(inputs);
    }
    this.biases = new Float64Array(numClasses);
    for (let k = 0; k < numClasses; k++) {
      this.biases[k] = (rand() * 2 - 1) * 0.1;
    }
  }

  classify(pixels: Float32Array): number[] {
    const inputs = this.width * this.height * 3;
    const logits = new Array<number>(this.numClasses);
    for (let k = 0; k < this.numClasses; k++) {
      let z = this.biases[k];
      const row = k * inputs;
      for (let i = 0; i < inputs; i++) {
        z += this.weights[row + i] * pixels[i];
      }
      logits[k] = z;
    }
    return softmax(logits);
  }
}

export function parseModelSpec(spec: string, options: ModelOptions): Promise<Classifier> | Classifier {
  if (spec === 'constant') {
    return new ConstantModel(options.classes, options.width, options.height);
  }
  if (spec === 'linear') {
    return new SeededLinearModel(options.classes, options.width, options.height, options.seed);
  }
  if (spec.startsWith('tfjs:')) {
    const dir = spec.slice('tfjs:'.length);
    if (dir.length === 0) {
      throw new Error('tfjs model spec needs a directory: tfjs:<dir>');
    }
    // loaded lazily so the classical models work without pulling tfjs in
    return import('./tfjs_model.js').then(m => m.loadTfjsModel(dir, options));
  }
  throw new Error(`unknown model ${JSON.stringify(spec)}; use constant, linear, or tfjs:<dir>`);
}
