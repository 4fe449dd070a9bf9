/**
 * Sidecar exporter: for every PNG in a directory, write the detection-box
 * JSON and saliency-mask PNG the attack toolkit consumes, and — when a
 * classifier is configured — a manifest.jsonl labeling each image with the
 * classifier's prediction so every entry survives the toolkit's
 * pre-attack classification check.
 */

import { copyFile, mkdir, readdir, readFile, writeFile } from 'fs/promises';
import { basename, join, resolve } from 'path';

import { connectedComponentBoxes } from './boxes.js';
import type { Classifier } from './models.js';
import { decodeRgbPng, encodeMaskPng } from './png.js';
import { saliencyMask } from './saliency.js';

export interface ExportResult {
  exported: string[];
  manifestPath: string | null;
}

function argmax(values: number[]): number {
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return best;
}

export async function exportSidecars(
  imagesDir: string,
  outDir: string,
  model: Classifier | null = null,
): Promise<ExportResult> {
  const names = (await readdir(imagesDir))
    .filter(name => name.toLowerCase().endsWith('.png'))
    .sort();
  if (names.length === 0) {
    throw new Error(`no .png files in ${imagesDir}`);
  }
  await mkdir(outDir, { recursive: true });

  const manifestLines: string[] = [];
  const exported: string[] = [];

  for (const name of names) {
    const image = decodeRgbPng(await readFile(join(imagesDir, name)));
    const stem = basename(name, '.png');

    const bits = saliencyMask(image);
    const boxes = connectedComponentBoxes(bits, image.width, image.height);

    const boxesName = `${stem}.boxes.json`;
    const saliencyName = `${stem}.saliency.png`;
    await writeFile(join(outDir, boxesName), JSON.stringify(boxes, null, 2) + '\n');
    await writeFile(join(outDir, saliencyName), encodeMaskPng(bits, image.width, image.height));
    exported.push(name);

    if (model !== null) {
      if (image.width !== model.width || image.height !== model.height) {
        throw new Error(
          `${name} is ${image.width}x${image.height}, model expects ` +
            `${model.width}x${model.height}`,
        );
      }
      if (resolve(join(imagesDir, name)) !== resolve(join(outDir, name))) {
        await copyFile(join(imagesDir, name), join(outDir, name));
      }
      const labelId = argmax(await model.classify(image.pixels));
      manifestLines.push(
        JSON.stringify({
          boxes: boxesName,
          image: name,
          label_id: labelId,
          label_name: `class${labelId}`,
          saliency: saliencyName,
        }),
      );
    }
  }

  let manifestPath: string | null = null;
  if (model !== null) {
    manifestPath = join(outDir, 'manifest.jsonl');
    await writeFile(manifestPath, manifestLines.join('\n') + '\n');
  }
  return { exported, manifestPath };
}
