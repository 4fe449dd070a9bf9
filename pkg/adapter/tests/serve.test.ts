import { spawn } from 'child_process';
import { once } from 'events';
import { existsSync } from 'fs';
import { dirname, join } from 'path';
import { PassThrough } from 'stream';
import { fileURLToPath } from 'url';

import { describe, expect, it } from 'vitest';

import { ConstantModel, SeededLinearModel } from '../src/models';
import { encodePixels } from '../src/protocol';
import { startServer } from '../src/serve';

interface Session {
  send: (payload: unknown) => void;
  raw: (text: string) => void;
  finish: () => Promise<unknown[]>;
}

function openSession(model: ConstantModel | SeededLinearModel): Session {
  const input = new PassThrough();
  const output = new PassThrough();
  const done = startServer(model, input, output);

  const chunks: Buffer[] = [];
  output.on('data', chunk => chunks.push(chunk));

  return {
    send(payload: unknown) {
      input.write(JSON.stringify(payload) + '\n');
    },
    raw(text: string) {
      input.write(text);
    },
    async finish() {
      input.end();
      await done;
      return Buffer.concat(chunks)
        .toString('utf8')
        .split('\n')
        .filter(line => line.length > 0)
        .map(line => JSON.parse(line));
    },
  };
}

function randomPixels(model: { width: number; height: number }, seed: number): Float32Array {
  const pixels = new Float32Array(model.width * model.height * 3);
  let state = seed;
  for (let i = 0; i < pixels.length; i++) {
    state = (state * 1103515245 + 12345) & 0x7fffffff;
    pixels[i] = (state % 1000) / 1000;
  }
  return pixels;
}

describe('startServer', () => {
  it('answers the handshake with the model shape', async () => {
    const model = new SeededLinearModel(7, 5, 4, 2);
    const session = openSession(model);
    session.send({ type: 'meta' });
    const replies = await session.finish();
    expect(replies).toEqual([
      { type: 'meta', num_classes: 7, width: 5, height: 4, channels: 3 },
    ]);
  });

  it('classifies pixels exactly as the model does directly', async () => {
    const model = new SeededLinearModel(4, 6, 6, 6);
    const pixels = randomPixels(model, 42);
    const session = openSession(model);
    session.send({ type: 'classify', id: 31, pixels: encodePixels(pixels) });
    const replies = await session.finish();

    expect(replies).toHaveLength(1);
    const reply = replies[0] as { type: string; id: number; values: number[] };
    expect(reply.type).toBe('probs');
    expect(reply.id).toBe(31);
    expect(reply.values).toEqual(model.classify(pixels));
  });

  it('replies in request order with ids echoed back', async () => {
    const model = new ConstantModel(3, 2, 2);
    const session = openSession(model);
    const ids = [5, 1, 9, 2 ** 53 - 1];
    for (const id of ids) {
      session.send({ type: 'classify', id, pixels: encodePixels(randomPixels(model, id % 7)) });
    }
    const replies = (await session.finish()) as Array<{ id: number }>;
    expect(replies.map(r => r.id)).toEqual(ids);
  });

  it('sends an error reply on a malformed line and keeps serving', async () => {
    const model = new ConstantModel(2, 2, 2);
    const session = openSession(model);
    session.raw('this is not json\n');
    session.send({ type: 'classify', id: 1, pixels: 'AAAA' }); // wrong byte count
    session.send({ type: 'meta' });
    const replies = (await session.finish()) as Array<{ type: string }>;
    expect(replies.map(r => r.type)).toEqual(['error', 'error', 'meta']);
  });

  it('handles requests split across stream chunks', async () => {
    const model = new SeededLinearModel(3, 2, 2, 3);
    const line = JSON.stringify({ type: 'meta' }) + '\n';
    const session = openSession(model);
    session.raw(line.slice(0, 4));
    session.raw(line.slice(4));
    const replies = (await session.finish()) as Array<{ type: string }>;
    expect(replies.map(r => r.type)).toEqual(['meta']);
  });
});

describe('cli.js serve', () => {
  const cliPath = join(dirname(fileURLToPath(import.meta.url)), '..', 'dist', 'cli.js');

  it.skipIf(!existsSync(cliPath))('serves over stdio as a subprocess', async () => {
    const child = spawn(process.execPath, [
      cliPath,
      'serve',
      '--model',
      'linear',
      '--seed',
      '5',
      '--classes',
      '4',
      '--width',
      '3',
      '--height',
      '3',
    ]);

    const chunks: Buffer[] = [];
    child.stdout.on('data', chunk => chunks.push(chunk));

    const model = new SeededLinearModel(4, 3, 3, 5);
    const pixels = randomPixels(model, 11);
    child.stdin.write(JSON.stringify({ type: 'meta' }) + '\n');
    child.stdin.write(
      JSON.stringify({ type: 'classify', id: 8, pixels: encodePixels(pixels) }) + '\n',
    );
    child.stdin.end();

    const [code] = (await once(child, 'exit')) as [number];
    expect(code).toBe(0);

    const replies = Buffer.concat(chunks)
      .toString('utf8')
      .split('\n')
      .filter(line => line.length > 0)
      .map(line => JSON.parse(line));
    expect(replies).toHaveLength(2);
    expect(replies[0]).toEqual({
      type: 'meta',
      num_classes: 4,
      width: 3,
      height: 3,
      channels: 3,
    });
    expect(replies[1].id).toBe(8);
    expect(replies[1].values).toEqual(model.classify(pixels));
  });
});
