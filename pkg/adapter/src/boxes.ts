/**
 * Detection-box export: connected components of a binary mask.
 *
 * Each 4-connected component becomes one box; its confidence is the fill
 * ratio (component area over box area), which rewards compact blobs the way
 * a detector's score would. Boxes use half-open right/bottom bounds.
 */

export interface DetectionBox {
  label: string;
  confidence: number;
  left: number;
  top: number;
  right: number;
  bottom: number;
}

export function connectedComponentBoxes(
  bits: Uint8Array,
  width: number,
  height: number,
  minArea = 4,
): DetectionBox[] {
  if (bits.length !== width * height) {
    throw new Error(`mask has ${bits.length} pixels, expected ${width * height}`);
  }
  const visited = new Uint8Array(bits.length);
  const boxes: DetectionBox[] = [];
  const stack: number[] = [];

  for (let start = 0; start < bits.length; start++) {
    if (!bits[start] || visited[start]) {
      continue;
    }
    let minX = width;
    let minY = height;
    let maxX = -1;
    let maxY = -1;
    let area = 0;

    visited[start] = 1;
    stack.push(start);
    while (stack.length > 0) {
      const index = stack.pop() as number;
      const x = index % width;
      const y = (index - x) / width;
      area += 1;
      minX = Math.min(minX, x);
      maxX = Math.max(maxX, x);
      minY = Math.min(minY, y);
      maxY = Math.max(maxY, y);

      if (x > 0 && bits[index - 1] && !visited[index - 1]) {
        visited[index - 1] = 1;
        stack.push(index - 1);
      }
      if (x + 1 < width && bits[index + 1] && !visited[index + 1]) {
        visited[index + 1] = 1;
        stack.push(index + 1);
      }
      if (y > 0 && bits[index - width] && !visited[index - width]) {
        visited[index - width] = 1;
        stack.push(index - width);
      }
      if (y + 1 < height && bits[index + width] && !visited[index + width]) {
        visited[index + width] = 1;
        stack.push(index + width);
      }
    }

    if (area < minArea) {
      continue;
    }
    const boxArea = (maxX - minX + 1) * (maxY - minY + 1);
    boxes.push({
      label: `region${boxes.length}`,
      confidence: area / boxArea,
      left: minX,
      top: minY,
      right: maxX + 1,
      bottom: maxY + 1,
    });
  }
  return boxes;
}
