/** Face candidate detection on raw portraits.
 *
 * The backend is a deterministic chroma heuristic: skin-toned pixels are
 * grouped into connected components and each sufficiently large component
 * is one face candidate.  No learned weights, so results never drift
 * between machines or runs.
 */

import { Box, RgbImage } from './raster';

export interface FaceBox extends Box {
  /** component size in pixels, not box area */
  area: number;
}

/**
 * Classic RGB skin gate (Peer et al. style thresholds).  Tuned for
 * uniform daylight tones; red-dominant lip pixels pass too, which is fine
 * because they belong to the face blob and get relabelled by the parser.
 */
export function isSkinRgb(r: number, g: number, b: number): boolean {
  const max = Math.max(r, g, b);
  const min = Math.min(r, g, b);
  return r > 95 && g > 40 && b > 20 && max - min > 15 && r - g > 15 && r - b > 15;
}

/** Byte mask of the skin gate over a packed RGB buffer. */
export function skinMask(img: RgbImage): Uint8Array {
  const n = img.width * img.height;
  const mask = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const j = i * 3;
    if (isSkinRgb(img.data[j], img.data[j + 1], img.data[j + 2])) mask[i] = 1;
  }
  return mask;
}

/**
 * Find face candidates as 4-connected skin components.
 *
 * Components smaller than `minAreaFrac` of the image (and never fewer
 * than 64 pixels) are treated as noise.  Boxes come back ordered largest
 * first, ties broken by position, so candidate order is deterministic.
 */
export function detectFaces(img: RgbImage, minAreaFrac = 0.005): FaceBox[] {
  const { width, height } = img;
  const mask = skinMask(img);
  const minArea = Math.max(64, Math.floor(minAreaFrac * width * height));
  const seen = new Uint8Array(mask.length);
  const stack = new Int32Array(mask.length);
  const boxes: FaceBox[] = [];

  for (let start = 0; start < mask.length; start++) {
    if (mask[start] === 0 || seen[start] !== 0) continue;
    // flood one component
    let top = 0;
    stack[top++] = start;
    seen[start] = 1;
    let area = 0;
    let x0 = width, y0 = height, x1 = -1, y1 = -1;
    while (top > 0) {
      const p = stack[--top];
      const px = p % width;
      const py = (p - px) / width;
      area++;
      if (px < x0) x0 = px;
      if (px > x1) x1 = px;
      if (py < y0) y0 = py;
      if (py > y1) y1 = py;
      if (px > 0 && mask[p - 1] !== 0 && seen[p - 1] === 0) { seen[p - 1] = 1; stack[top++] = p - 1; }
      if (px + 1 < width && mask[p + 1] !== 0 && seen[p + 1] === 0) { seen[p + 1] = 1; stack[top++] = p + 1; }
      if (py > 0 && mask[p - width] !== 0 && seen[p - width] === 0) { seen[p - width] = 1; stack[top++] = p - width; }
      if (py + 1 < height && mask[p + width] !== 0 && seen[p + width] === 0) { seen[p + width] = 1; stack[top++] = p + width; }
    }
    if (area >= minArea) {
      boxes.push({ x0, y0, x1: x1 + 1, y1: y1 + 1, area });
    }
  }

  boxes.sort((a, b) => b.area - a.area || a.y0 - b.y0 || a.x0 - b.x0);
  return boxes;
}

/**
 * Expand a face box to the square crop window used for alignment.
 *
 * Adds `marginFrac` of the longer side on every edge, squares the result
 * around the box centre, then shifts it back inside the image.  The
 * window is clamped to the image, so very tight sources yield a smaller
 * (still square where possible) window rather than an error.
 */
export function alignmentWindow(box: Box, width: number, height: number, marginFrac = 0.25): Box {
  const bw = box.x1 - box.x0;
  const bh = box.y1 - box.y0;
  const margin = Math.round(Math.max(bw, bh) * marginFrac);
  let side = Math.max(bw, bh) + 2 * margin;
  side = Math.min(side, width, height);
  const cx = Math.floor((box.x0 + box.x1) / 2);
  const cy = Math.floor((box.y0 + box.y1) / 2);
  let x0 = cx - Math.floor(side / 2);
  let y0 = cy - Math.floor(side / 2);
  if (x0 < 0) x0 = 0;
  if (y0 < 0) y0 = 0;
  if (x0 + side > width) x0 = width - side;
  if (y0 + side > height) y0 = height - side;
  return { x0, y0, x1: x0 + side, y1: y0 + side };
}
