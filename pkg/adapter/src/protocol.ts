/**
 * Line-delimited JSON oracle protocol.
 *
 * One request per line on stdin, one reply per line on stdout:
 *
 *   {"type": "meta"}
 *     -> {"type": "meta", "num_classes": K, "width": W, "height": H, "channels": 3}
 *   {"type": "classify", "id": N, "pixels": "<base64>"}
 *     -> {"type": "probs", "id": N, "values": [p0, ..., pK-1]}
 *
 * Pixels are row-major, channels-last float32 little-endian in [0, 1].
 * Malformed lines get {"type": "error", "message": "..."} and the server
 * keeps serving; ids never exceed 2^53 - 1 so they survive JSON number
 * round-trips exactly.
 */

export interface MetaReply {
  type: 'meta';
  num_classes: number;
  width: number;
  height: number;
  channels: 3;
}

export interface ClassifyRequest {
  type: 'classify';
  id: number;
  pixels: string;
}

export interface ProbsReply {
  type: 'probs';
  id: number;
  values: number[];
}

export interface ErrorReply {
  type: 'error';
  message: string;
}

export class ProtocolError extends Error {}

export function parseRequest(line: string): { type: 'meta' } | ClassifyRequest {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new ProtocolError('request is not valid JSON');
  }
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    throw new ProtocolError('request is not a JSON object');
  }
  const obj = raw as Record<string, unknown>;
  if (obj.type === 'meta') {
    return { type: 'meta' };
  }
  if (obj.type === 'classify') {
    if (typeof obj.id !== 'number' || !Number.isSafeInteger(obj.id) || obj.id < 0) {
      throw new ProtocolError('classify id must be a non-negative safe integer');
    }
    if (typeof obj.pixels !== 'string') {
      throw new ProtocolError('classify pixels must be a base64 string');
    }
    return { type: 'classify', id: obj.id, pixels: obj.pixels };
  }
  throw new ProtocolError(`unknown request type ${JSON.stringify(obj.type)}`);
}

/** Decode base64 float32 little-endian pixels, checking the element count. */
export function decodePixels(encoded: string, expectedElements: number): Float32Array {
  if (!/^[A-Za-z0-9+/]*={0,2}$/.test(encoded)) {
    throw new ProtocolError('pixels are not valid base64');
  }
  const bytes = Buffer.from(encoded, 'base64');
  if (bytes.length !== expectedElements * 4) {
    throw new ProtocolError(
      `pixel payload is ${bytes.length} bytes, expected ${expectedElements * 4}`,
    );
  }
  const out = new Float32Array(expectedElements);
  for (let i = 0; i < expectedElements; i++) {
    out[i] = bytes.readFloatLE(i * 4);
  }
  return out;
}

export function encodePixels(pixels: Float32Array): string {
  const bytes = Buffer.alloc(pixels.length * 4);
  for (let i = 0; i < pixels.length; i++) {
    bytes.writeFloatLE(pixels[i], i * 4);
  }
  return bytes.toString('base64');
}

/** Split a byte stream into complete lines, buffering partial ones. */
export function lineSplitter(onLine: (line: string) => void): (chunk: Buffer) => void {
  let pending = '';
  return (chunk: Buffer) => {
    pending += chunk.toString('utf-8');
    for (;;) {
      const newline = pending.indexOf('\n');
      if (newline < 0) {
        break;
      }
      const line = pending.slice(0, newline).trim();
      pending = pending.slice(newline + 1);
      if (line.length > 0) {
        onLine(line);
      }
    }
  };
}
