/**
 * Oracle server loop: line-delimited JSON requests on an input stream,
 * one reply line each on the output stream.
 *
 * Requests are answered strictly in arrival order (async classifiers are
 * chained, never interleaved). A malformed line gets an error reply and the
 * loop keeps serving; end of input resolves cleanly.
 */

import type { Classifier } from './models.js';
import { decodePixels, lineSplitter, parseRequest } from './protocol.js';

export function startServer(
  model: Classifier,
  input: NodeJS.ReadableStream,
  output: NodeJS.WritableStream,
): Promise<void> {
  const reply = (payload: unknown) => {
    output.write(JSON.stringify(payload) + '\n');
  };

  const handle = async (line: string) => {
    try {
      const request = parseRequest(line);
      if (request.type === 'meta') {
        reply({
          type: 'meta',
          num_classes: model.numClasses,
          width: model.width,
          height: model.height,
          channels: model.channels,
        });
        return;
      }
      const pixels = decodePixels(request.pixels, model.width * model.height * 3);
      const values = await model.classify(pixels);
      reply({ type: 'probs', id: request.id, values });
    } catch (err) {
      reply({ type: 'error', message: err instanceof Error ? err.message : String(err) });
    }
  };

  return new Promise(resolve => {
    let chain = Promise.resolve();
    input.on(
      'data',
      lineSplitter(line => {
        chain = chain.then(() => handle(line));
      }),
    );
    input.on('end', () => {
      void chain.then(resolve);
    });
  });
}
