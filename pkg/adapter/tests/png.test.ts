import { describe, expect, it } from 'vitest';

import { decodeMaskPng, decodeRgbPng, encodeMaskPng, encodeRgbPng } from '../src/png';

function ramp(width: number, height: number): Float32Array {
  const pixels = new Float32Array(width * height * 3);
  for (let i = 0; i < pixels.length; i++) {
    pixels[i] = (i % 256) / 255;
  }
  return pixels;
}

describe('rgb png codec', () => {
  it('round-trips byte-exact values', () => {
    const image = { width: 9, height: 7, pixels: ramp(9, 7) };
    const decoded = decodeRgbPng(encodeRgbPng(image));
    expect(decoded.width).toBe(9);
    expect(decoded.height).toBe(7);
    expect(Array.from(decoded.pixels)).toEqual(Array.from(image.pixels));
  });

  it('quantizes by rounding half up', () => {
    // 0.5/255 boundary: values straddling a half-step land on neighbors
    const image = { width: 2, height: 1, pixels: new Float32Array([
      0.0019, 0.002, 0.5, 0.999, 1.0, 0.0,
    ]) };
    const decoded = decodeRgbPng(encodeRgbPng(image));
    expect(decoded.pixels[0]).toBe(0);
    expect(decoded.pixels[1]).toBe(Math.fround(1 / 255));
    expect(decoded.pixels[4]).toBe(1);
  });
});

describe('mask png codec', () => {
  it('round-trips arbitrary masks', () => {
    const width = 11;
    const height = 5;
    const bits = new Uint8Array(width * height).map((_, i) => (i % 3 === 0 ? 1 : 0));
    const decoded = decodeMaskPng(encodeMaskPng(bits, width, height));
    expect(decoded.width).toBe(width);
    expect(decoded.height).toBe(height);
    expect(Array.from(decoded.bits)).toEqual(Array.from(bits));
  });

  it('rejects size mismatches', () => {
    expect(() => encodeMaskPng(new Uint8Array(10), 4, 4)).toThrow(/expected 16/);
  });
});
