/** Single-image adapter: raw portrait in, histogram record plus media out. */

import * as fs from 'fs';
import * as path from 'path';
import { PNG } from 'pngjs';
import { alignmentWindow, detectFaces } from './detect';
import { grayscaleLuma } from './luma';
import { ManifestRow } from './manifest';
import { buildMask, FaceClass, labelCrop } from './parse';
import { cropResizeNearest, RgbImage, writeGrayPng, writeRgbPng } from './raster';

export type AdapterStatus = 'ok' | 'no_face' | 'multi_face' | 'parse_fail';

export interface AdapterRecord {
  imageId: string;
  subjectId: string;
  cohort: string;
  sourcePath: string;
  /** set only for ok records */
  cropPath: string | null;
  maskPath: string | null;
  status: AdapterStatus;
  /** empty for ok records, reason otherwise */
  detail: string;
  /** 256-bin luma histogram over mask pixels; null unless ok */
  counts: number[] | null;
}

export interface ProcessOptions {
  /** directory receiving <image_id>.crop.png and <image_id>.mask.png */
  mediaDir: string;
  skinClasses: ReadonlySet<FaceClass>;
  /** crop side in pixels */
  cropSize?: number;
}

export const CROP_SIZE = 224;

function failure(row: ManifestRow, status: AdapterStatus, detail: string): AdapterRecord {
  return {
    imageId: row.imageId,
    subjectId: row.subjectId,
    cohort: row.cohort,
    sourcePath: row.path,
    cropPath: null,
    maskPath: null,
    status,
    detail,
    counts: null,
  };
}

/**
 * Process one manifest row end to end.
 *
 * Unreadable or undecodable sources come back as parse_fail; zero or
 * several face candidates as no_face / multi_face.  An ok record has a
 * 224x224 crop and a same-sized single-channel mask written under
 * `mediaDir`, and its histogram total equals the mask's nonzero pixel
 * count by construction.  Errors never throw; they are encoded in the
 * record so a batch can keep going.
 */
export async function processOne(row: ManifestRow, opts: ProcessOptions): Promise<AdapterRecord> {
  const size = opts.cropSize ?? CROP_SIZE;

  let img: RgbImage;
  try {
    const buf = await fs.promises.readFile(row.path);
    const png = PNG.sync.read(buf);
    const n = png.width * png.height;
    const data = new Uint8Array(n * 3);
    for (let i = 0; i < n; i++) {
      data[i * 3] = png.data[i * 4];
      data[i * 3 + 1] = png.data[i * 4 + 1];
      data[i * 3 + 2] = png.data[i * 4 + 2];
    }
    img = { width: png.width, height: png.height, data };
  } catch (err) {
    return failure(row, 'parse_fail', `cannot decode ${row.path}: ${message(err)}`);
  }

  const faces = detectFaces(img);
  if (faces.length === 0) {
    return failure(row, 'no_face', 'no face candidate found');
  }
  if (faces.length > 1) {
    return failure(row, 'multi_face', `${faces.length} face candidates found`);
  }

  const window = alignmentWindow(faces[0], img.width, img.height);
  const crop = cropResizeNearest(img, window, size, size);
  const labels = labelCrop(crop);
  const mask = buildMask(labels, size, size, opts.skinClasses);

  let nonzero = 0;
  for (let i = 0; i < mask.data.length; i++) {
    if (mask.data[i] !== 0) nonzero++;
  }
  if (nonzero === 0) {
    const classes = [...opts.skinClasses].sort().join(',');
    return failure(row, 'parse_fail', `mask empty for classes {${classes}}`);
  }

  const cropPath = path.join(opts.mediaDir, `${row.imageId}.crop.png`);
  const maskPath = path.join(opts.mediaDir, `${row.imageId}.mask.png`);
  try {
    writeRgbPng(cropPath, crop);
    writeGrayPng(maskPath, mask);
  } catch (err) {
    return failure(row, 'parse_fail', `cannot write media: ${message(err)}`);
  }

  const counts = new Array<number>(256).fill(0);
  for (let i = 0; i < mask.data.length; i++) {
    if (mask.data[i] === 0) continue;
    const j = i * 3;
    counts[grayscaleLuma(crop.data[j], crop.data[j + 1], crop.data[j + 2])]++;
  }

  return {
    imageId: row.imageId,
    subjectId: row.subjectId,
    cohort: row.cohort,
    sourcePath: row.path,
    cropPath,
    maskPath,
    status: 'ok',
    detail: '',
    counts,
  };
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
