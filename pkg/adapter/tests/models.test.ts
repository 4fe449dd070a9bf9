import { describe, expect, it } from 'vitest';

import {
  ConstantModel,
  parseModelSpec,
  SeededLinearModel,
  seededRandom,
  softmax,
} from '../src/models';

const OPTIONS = { seed: 5, classes: 4, width: 6, height: 6 };

describe('seededRandom', () => {
  it('is deterministic per seed', () => {
    const a = seededRandom(123);
    const b = seededRandom(123);
    const c = seededRandom(124);
    const fromA = [a(), a(), a()];
    expect([b(), b(), b()]).toEqual(fromA);
    expect([c(), c(), c()]).not.toEqual(fromA);
  });

  it('stays in [0, 1)', () => {
    const rand = seededRandom(7);
    for (let i = 0; i < 1000; i++) {
      const v = rand();
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThan(1);
    }
  });
});

describe('softmax', () => {
  it('sums to one and preserves order', () => {
    const probs = softmax([2, -1, 0.5]);
    const total = probs.reduce((a, b) => a + b, 0);
    expect(Math.abs(total - 1)).toBeLessThan(1e-12);
    expect(probs[0]).toBeGreaterThan(probs[2]);
    expect(probs[2]).toBeGreaterThan(probs[1]);
  });

  it('matches the direct formula', () => {
    const logits = [0.3, 1.7, -2.2];
    const denominator = logits.reduce((a, z) => a + Math.exp(z), 0);
    const probs = softmax(logits);
    logits.forEach((z, k) => {
      expect(Math.abs(probs[k] - Math.exp(z) / denominator)).toBeLessThan(1e-12);
    });
  });

  it('survives large logits', () => {
    const probs = softmax([1000, 1001, 999]);
    expect(probs.every(Number.isFinite)).toBe(true);
    expect(Math.abs(probs.reduce((a, b) => a + b, 0) - 1)).toBeLessThan(1e-12);
  });
});

describe('ConstantModel', () => {
  it('returns a one-hot distribution regardless of input', () => {
    const model = new ConstantModel(3, 4, 4);
    const values = model.classify(new Float32Array(48).fill(0.5));
    expect(values).toEqual([1, 0, 0]);
    expect(model.classify(new Float32Array(48))).toEqual(values);
  });

  it('rejects degenerate class counts', () => {
    expect(() => new ConstantModel(1, 4, 4)).toThrow();
  });
});

describe('SeededLinearModel', () => {
  it('produces a probability vector', () => {
    const model = new SeededLinearModel(OPTIONS.classes, OPTIONS.width, OPTIONS.height, 5);
    const pixels = new Float32Array(OPTIONS.width * OPTIONS.height * 3).fill(0.5);
    const values = model.classify(pixels);
    expect(values).toHaveLength(OPTIONS.classes);
    expect(values.every(v => v > 0 && v < 1)).toBe(true);
    expect(Math.abs(values.reduce((a, b) => a + b, 0) - 1)).toBeLessThan(1e-9);
  });

  it('is deterministic per seed and differs across seeds', () => {
    const pixels = new Float32Array(OPTIONS.width * OPTIONS.height * 3).map(() => 0.3);
    const a = new SeededLinearModel(4, 6, 6, 5).classify(pixels);
    const b = new SeededLinearModel(4, 6, 6, 5).classify(pixels);
    const c = new SeededLinearModel(4, 6, 6, 6).classify(pixels);
    expect(b).toEqual(a);
    expect(c).not.toEqual(a);
  });

  it('responds to pixel changes', () => {
    const model = new SeededLinearModel(4, 6, 6, 5);
    const pixels = new Float32Array(108).fill(0.5);
    const before = model.classify(pixels);
    pixels[0] = 1.0;
    expect(model.classify(pixels)).not.toEqual(before);
  });
});

describe('parseModelSpec', () => {
  it('builds the classical models synchronously', () => {
    expect(parseModelSpec('constant', OPTIONS)).toBeInstanceOf(ConstantModel);
    expect(parseModelSpec('linear', OPTIONS)).toBeInstanceOf(SeededLinearModel);
  });

  it('rejects unknown specs and empty tfjs paths', () => {
    expect(() => parseModelSpec('resnet', OPTIONS)).toThrow(/unknown model/);
    expect(() => parseModelSpec('tfjs:', OPTIONS)).toThrow(/directory/);
  });
});
