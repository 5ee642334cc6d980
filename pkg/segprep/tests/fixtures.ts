/** Synthetic portrait fixtures drawn pixel by pixel. */

import * as fs from 'fs';
import * as path from 'path';
import { makeRgb, RgbImage, writeRgbPng } from '../src/raster';

export const BACKGROUND: [number, number, number] = [40, 60, 90];
export const EYE_COLOR: [number, number, number] = [30, 30, 30];
export const MOUTH_COLOR: [number, number, number] = [180, 60, 70];

export function drawEllipse(
  img: RgbImage,
  cx: number,
  cy: number,
  rx: number,
  ry: number,
  rgb: [number, number, number]
): void {
  for (let y = 0; y < img.height; y++) {
    for (let x = 0; x < img.width; x++) {
      const dx = (x - cx) / rx;
      const dy = (y - cy) / ry;
      if (dx * dx + dy * dy <= 1) {
        const i = (y * img.width + x) * 3;
        img.data[i] = rgb[0];
        img.data[i + 1] = rgb[1];
        img.data[i + 2] = rgb[2];
      }
    }
  }
}

export interface PortraitOptions {
  skin?: [number, number, number];
  width?: number;
  height?: number;
}

/** One face: skin ellipse with two dark eyes and a red mouth. */
export function makePortrait(opts: PortraitOptions = {}): RgbImage {
  const width = opts.width ?? 96;
  const height = opts.height ?? 128;
  const skin = opts.skin ?? [210, 160, 130];
  const img = makeRgb(width, height, BACKGROUND);
  const cx = Math.floor(width / 2);
  const cy = Math.floor(height / 2) - 4;
  drawEllipse(img, cx, cy, 26, 34, skin);
  drawEllipse(img, cx - 10, cy - 10, 3, 3, EYE_COLOR);
  drawEllipse(img, cx + 10, cy - 10, 3, 3, EYE_COLOR);
  drawEllipse(img, cx, cy + 16, 8, 4, MOUTH_COLOR);
  return img;
}

export function makeBlank(width = 96, height = 128): RgbImage {
  return makeRgb(width, height, BACKGROUND);
}

export function makeTwoFace(): RgbImage {
  const img = makeRgb(192, 128, BACKGROUND);
  drawEllipse(img, 48, 60, 26, 34, [210, 160, 130]);
  drawEllipse(img, 144, 60, 24, 30, [195, 145, 115]);
  return img;
}

export function writeFixture(dir: string, name: string, img: RgbImage): string {
  const p = path.join(dir, name);
  writeRgbPng(p, img);
  return p;
}

export function writeManifest(dir: string, rows: string[][]): string {
  const p = path.join(dir, 'manifest.csv');
  const lines = ['image_id,subject_id,cohort,path', ...rows.map(r => r.join(','))];
  fs.writeFileSync(p, lines.join('\n') + '\n');
  return p;
}
