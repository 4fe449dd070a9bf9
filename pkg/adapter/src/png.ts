/** PNG reading and writing in the shapes the toolkit's file formats use:
 * 8-bit RGB images as channels-last float32 in [0, 1], and 8-bit grayscale
 * saliency masks. */

import { PNG } from 'pngjs';

export interface RgbImage {
  width: number;
  height: number;
  /** row-major, channels-last, values in [0, 1] */
  pixels: Float32Array;
}

export function decodeRgbPng(data: Buffer): RgbImage {
  const png = PNG.sync.read(data);
  const pixels = new Float32Array(png.width * png.height * 3);
  for (let i = 0; i < png.width * png.height; i++) {
    pixels[i * 3] = png.data[i * 4] / 255;
    pixels[i * 3 + 1] = png.data[i * 4 + 1] / 255;
    pixels[i * 3 + 2] = png.data[i * 4 + 2] / 255;
  }
  return { width: png.width, height: png.height, pixels };
}

export function encodeRgbPng(image: RgbImage): Buffer {
  const png = new PNG({ width: image.width, height: image.height });
  for (let i = 0; i < image.width * image.height; i++) {
    for (let c = 0; c < 3; c++) {
      const v = image.pixels[i * 3 + c];
      png.data[i * 4 + c] = Math.min(255, Math.max(0, Math.floor(v * 255 + 0.5)));
    }
    png.data[i * 4 + 3] = 255;
  }
  return PNG.sync.write(png);
}

/** Write a boolean mask as an 8-bit grayscale PNG (255 = salient). */
export function encodeMaskPng(bits: Uint8Array, width: number, height: number): Buffer {
  if (bits.length !== width * height) {
    throw new Error(`mask has ${bits.length} pixels, expected ${width * height}`);
  }
  // pngjs always holds pixels as RGBA internally; colorType 0 narrows the
  // encoded output to 8-bit grayscale
  const png = new PNG({ width, height });
  for (let i = 0; i < bits.length; i++) {
    const v = bits[i] ? 255 : 0;
    png.data[i * 4] = v;
    png.data[i * 4 + 1] = v;
    png.data[i * 4 + 2] = v;
    png.data[i * 4 + 3] = 255;
  }
  return PNG.sync.write(png, { colorType: 0 });
}

export function decodeMaskPng(data: Buffer): { bits: Uint8Array; width: number; height: number } {
  const png = PNG.sync.read(data);
  const bits = new Uint8Array(png.width * png.height);
  for (let i = 0; i < bits.length; i++) {
    // pngjs expands every color type to RGBA; the red channel carries gray
    bits[i] = png.data[i * 4] >= 128 ? 1 : 0;
  }
  return { bits, width: png.width, height: png.height };
}
