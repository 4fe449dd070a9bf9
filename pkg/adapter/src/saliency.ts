/**
 * Deterministic classical saliency: global luminance contrast.
 *
 * Each pixel's score is its distance from the mean luminance; pixels whose
 * score is more than one standard deviation above the mean score count as
 * salient. No weights to load, same output for the same input, good enough
 * to exercise region-restricted search pipelines end to end.
 */

import type { RgbImage } from './png.js';

export function luminance(image: RgbImage): Float64Array {
  const out = new Float64Array(image.width * image.height);
  for (let i = 0; i < out.length; i++) {
    out[i] =
      0.299 * image.pixels[i * 3] +
      0.587 * image.pixels[i * 3 + 1] +
      0.114 * image.pixels[i * 3 + 2];
  }
  return out;
}

export function saliencyMask(image: RgbImage): Uint8Array {
  const lum = luminance(image);
  let mean = 0;
  for (const v of lum) {
    mean += v;
  }
  mean /= lum.length;

  const scores = new Float64Array(lum.length);
  let scoreMean = 0;
  for (let i = 0; i < lum.length; i++) {
    scores[i] = Math.abs(lum[i] - mean);
    scoreMean += scores[i];
  }
  scoreMean /= scores.length;

  let variance = 0;
  for (const s of scores) {
    variance += (s - scoreMean) ** 2;
  }
  const std = Math.sqrt(variance / scores.length);

  const threshold = scoreMean + std;
  const bits = new Uint8Array(lum.length);
  for (let i = 0; i < scores.length; i++) {
    bits[i] = scores[i] > threshold ? 1 : 0;
  }
  return bits;
}
