/** Minimal raster types plus PNG IO. */

import * as fs from 'fs';
import { PNG } from 'pngjs';

/** Packed RGB image, 3 bytes per pixel, row major. */
export interface RgbImage {
  width: number;
  height: number;
  data: Uint8Array;
}

/** Single-channel image, 1 byte per pixel, row major. */
export interface GrayImage {
  width: number;
  height: number;
  data: Uint8Array;
}

export function makeRgb(width: number, height: number, fill: [number, number, number] = [0, 0, 0]): RgbImage {
  const data = new Uint8Array(width * height * 3);
  for (let i = 0; i < width * height; i++) {
    data[i * 3] = fill[0];
    data[i * 3 + 1] = fill[1];
    data[i * 3 + 2] = fill[2];
  }
  return { width, height, data };
}

/** Decode a PNG file to packed RGB; alpha is dropped. */
export function readRgbPng(path: string): RgbImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const n = png.width * png.height;
  const data = new Uint8Array(n * 3);
  for (let i = 0; i < n; i++) {
    data[i * 3] = png.data[i * 4];
    data[i * 3 + 1] = png.data[i * 4 + 1];
    data[i * 3 + 2] = png.data[i * 4 + 2];
  }
  return { width: png.width, height: png.height, data };
}

/** Decode a PNG file to a single channel (the red plane after expansion). */
export function readGrayPng(path: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const n = png.width * png.height;
  const data = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    data[i] = png.data[i * 4];
  }
  return { width: png.width, height: png.height, data };
}

export function writeRgbPng(path: string, img: RgbImage): void {
  const png = new PNG({ width: img.width, height: img.height });
  const n = img.width * img.height;
  for (let i = 0; i < n; i++) {
    png.data[i * 4] = img.data[i * 3];
    png.data[i * 4 + 1] = img.data[i * 3 + 1];
    png.data[i * 4 + 2] = img.data[i * 3 + 2];
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png, { colorType: 2 }));
}

/** Write a single-channel PNG (color type 0). */
export function writeGrayPng(path: string, img: GrayImage): void {
  const png = new PNG({ width: img.width, height: img.height });
  const n = img.width * img.height;
  for (let i = 0; i < n; i++) {
    const v = img.data[i];
    png.data[i * 4] = v;
    png.data[i * 4 + 1] = v;
    png.data[i * 4 + 2] = v;
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(path, PNG.sync.write(png, { colorType: 0 }));
}

/** Axis-aligned pixel box; x1/y1 exclusive. */
export interface Box {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/**
 * Crop `box` out of `img` and scale it to `outW` x `outH` with
 * nearest-neighbour sampling.  Nearest keeps the operation exactly
 * reproducible across platforms; source coordinates are clamped so a box
 * touching the image edge stays valid.
 */
export function cropResizeNearest(img: RgbImage, box: Box, outW: number, outH: number): RgbImage {
  const bw = box.x1 - box.x0;
  const bh = box.y1 - box.y0;
  if (bw <= 0 || bh <= 0) {
    throw new Error(`degenerate crop box ${bw}x${bh}`);
  }
  const out = makeRgb(outW, outH);
  for (let y = 0; y < outH; y++) {
    let sy = box.y0 + Math.floor(((y + 0.5) * bh) / outH);
    if (sy < 0) sy = 0;
    if (sy >= img.height) sy = img.height - 1;
    for (let x = 0; x < outW; x++) {
      let sx = box.x0 + Math.floor(((x + 0.5) * bw) / outW);
      if (sx < 0) sx = 0;
      if (sx >= img.width) sx = img.width - 1;
      const s = (sy * img.width + sx) * 3;
      const d = (y * outW + x) * 3;
      out.data[d] = img.data[s];
      out.data[d + 1] = img.data[s + 1];
      out.data[d + 2] = img.data[s + 2];
    }
  }
  return out;
}
