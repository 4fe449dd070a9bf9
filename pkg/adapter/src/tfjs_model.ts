/**
 * Loads a saved tfjs Layers model from a local directory (model.json plus
 * weight shard files) and adapts it to the Classifier interface.
 *
 * The stock file:// IO handlers only exist in the node-specific builds, so
 * this module brings its own small filesystem loader.
 */

import * as tf from '@tensorflow/tfjs';
import { readFile } from 'fs/promises';
import { join } from 'path';

import type { Classifier, ModelOptions } from './models.js';
import { softmax } from './models.js';

interface ModelJson {
  modelTopology: object;
  format?: string;
  generatedBy?: string;
  convertedBy?: string;
  weightsManifest: Array<{
    paths: string[];
    weights: tf.io.WeightsManifestEntry[];
  }>;
}

export function fileSystemLoader(dir: string): tf.io.IOHandler {
  return {
    async load(): Promise<tf.io.ModelArtifacts> {
      const manifest = JSON.parse(
        await readFile(join(dir, 'model.json'), 'utf-8'),
      ) as ModelJson;
      const weightSpecs: tf.io.WeightsManifestEntry[] = [];
      const shards: Buffer[] = [];
      for (const group of manifest.weightsManifest) {
        weightSpecs.push(...group.weights);
        for (const path of group.paths) {
          shards.push(await readFile(join(dir, path)));
        }
      }
      const merged = Buffer.concat(shards);
      const weightData = merged.buffer.slice(
        merged.byteOffset,
        merged.byteOffset + merged.byteLength,
      );
      return {
        modelTopology: manifest.modelTopology,
        format: manifest.format,
        generatedBy: manifest.generatedBy,
        convertedBy: manifest.convertedBy,
        weightSpecs,
        weightData,
      };
    },
  };
}

class TfjsModel implements Classifier {
  readonly channels = 3;

  constructor(
    private readonly model: tf.LayersModel,
    readonly numClasses: number,
    readonly width: number,
    readonly height: number,
  ) {}

  async classify(pixels: Float32Array): Promise<number[]> {
    const values = tf.tidy(() => {
      const input = tf.tensor4d(pixels, [1, this.height, this.width, 3]);
      return this.model.predict(input) as tf.Tensor;
    });
    try {
      const raw = Array.from(await values.data());
      if (raw.length !== this.numClasses) {
        throw new Error(
          `model produced ${raw.length} outputs, expected ${this.numClasses}`,
        );
      }
      const total = raw.reduce((a, b) => a + b, 0);
      const isDistribution =
        raw.every(v => v >= 0) && Math.abs(total - 1) <= 1e-3;
      return isDistribution ? raw.map(v => v / total) : softmax(raw);
    } finally {
      values.dispose();
    }
  }
}

export async function loadTfjsModel(dir: string, options: ModelOptions): Promise<Classifier> {
  const model = await tf.loadLayersModel(fileSystemLoader(dir));
  const outputShape = model.outputs[0].shape;
  const lastDim = outputShape[outputShape.length - 1];
  const numClasses = typeof lastDim === 'number' && lastDim > 1 ? lastDim : options.classes;

  const inputShape = model.inputs[0].shape;
  let height = options.height;
  let width = options.width;
  if (inputShape.length === 4) {
    if (typeof inputShape[1] === 'number' && inputShape[1] > 0) {
      height = inputShape[1];
    }
    if (typeof inputShape[2] === 'number' && inputShape[2] > 0) {
      width = inputShape[2];
    }
  }
  return new TfjsModel(model, numClasses, width, height);
}
