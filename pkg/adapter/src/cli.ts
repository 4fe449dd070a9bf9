#!/usr/bin/env node
/**
 * Command line entry point.
 *
 *   objattack-adapter serve --model <spec> [--seed N] [--classes K]
 *                            [--width W] [--height H]
 *   objattack-adapter export --images <dir> --out <dir> [--model <spec> ...]
 *
 * Model specs: constant | linear | tfjs:<dir>. `serve` speaks the oracle
 * wire protocol on stdin/stdout; `export` writes detection-box and saliency
 * sidecars (plus a labeled manifest when a model is given).
 */

import { parseArgs } from 'util';

import { exportSidecars } from './export.js';
import { parseModelSpec } from './models.js';
import type { Classifier, ModelOptions } from './models.js';
import { startServer } from './serve.js';

class UsageError extends Error {}

const USAGE = `usage:
  objattack-adapter serve --model <constant|linear|tfjs:DIR> [--seed N]
                          [--classes K] [--width W] [--height H]
  objattack-adapter export --images DIR --out DIR [--model SPEC]
                          [--seed N] [--classes K]`;

function intOption(raw: string | undefined, name: string, fallback: number): number {
  if (raw === undefined) {
    return fallback;
  }
  const value = Number(raw);
  if (!Number.isSafeInteger(value)) {
    throw new UsageError(`--${name} must be an integer, got ${JSON.stringify(raw)}`);
  }
  return value;
}

async function buildModel(
  spec: string,
  values: Record<string, string | undefined>,
): Promise<Classifier> {
  const options: ModelOptions = {
    seed: intOption(values.seed, 'seed', 0),
    classes: intOption(values.classes, 'classes', 10),
    width: intOption(values.width, 'width', 32),
    height: intOption(values.height, 'height', 32),
  };
  return await parseModelSpec(spec, options);
}

async function cmdServe(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: 'string' },
      seed: { type: 'string' },
      classes: { type: 'string' },
      width: { type: 'string' },
      height: { type: 'string' },
    },
  });
  if (!values.model) {
    throw new UsageError('serve requires --model');
  }
  const model = await buildModel(values.model, values);
  await startServer(model, process.stdin, process.stdout);
  return 0;
}

async function cmdExport(argv: string[]): Promise<number> {
  const { values } = parseArgs({
    args: argv,
    options: {
      images: { type: 'string' },
      out: { type: 'string' },
      model: { type: 'string' },
      seed: { type: 'string' },
      classes: { type: 'string' },
      width: { type: 'string' },
      height: { type: 'string' },
    },
  });
  if (!values.images || !values.out) {
    throw new UsageError('export requires --images and --out');
  }

  let model: Classifier | null = null;
  if (values.model) {
    // size the model to the first image unless dimensions were given
    if (values.width === undefined || values.height === undefined) {
      const { readdir, readFile } = await import('fs/promises');
      const { join } = await import('path');
      const { decodeRgbPng } = await import('./png.js');
      const names = (await readdir(values.images))
        .filter(n => n.toLowerCase().endsWith('.png'))
        .sort();
      if (names.length === 0) {
        throw new UsageError(`no .png files in ${values.images}`);
      }
      const first = decodeRgbPng(await readFile(join(values.images, names[0])));
      values.width = values.width ?? String(first.width);
      values.height = values.height ?? String(first.height);
    }
    model = await buildModel(values.model, values);
  }

  const result = await exportSidecars(values.images, values.out, model);
  process.stdout.write(
    `exported sidecars for ${result.exported.length} images` +
      (result.manifestPath ? `; manifest: ${result.manifestPath}` : '') +
      '\n',
  );
  return 0;
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  try {
    if (command === 'serve') {
      return await cmdServe(rest);
    }
    if (command === 'export') {
      return await cmdExport(rest);
    }
    throw new UsageError(`unknown command ${JSON.stringify(command ?? '')}`);
  } catch (err) {
    if (err instanceof UsageError || (err instanceof TypeError && 'code' in err)) {
      // parseArgs signals unknown/duplicate options with coded TypeErrors
      process.stderr.write(`${err.message}\n${USAGE}\n`);
      return 1;
    }
    process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url === `file://${process.argv[1]}`;
if (invokedDirectly) {
  main(process.argv.slice(2)).then(code => {
    process.exitCode = code;
  });
}
