/** Pixel-level face parsing of an aligned crop.
 *
 * Labels every crop pixel with one of four classes:
 *
 *   background  outside the face blob
 *   skin        face blob, normal skin chroma
 *   mouth       face blob, strongly red-dominant (lips)
 *   eye         non-skin region fully enclosed by the face blob
 *
 * Eyes are found topologically: any non-skin pocket that cannot reach the
 * crop border without crossing skin must sit inside the face.  That keeps
 * the parser free of geometry priors and learned weights.
 */

import { isSkinRgb } from './detect';
import { GrayImage, RgbImage } from './raster';

export const FACE_CLASSES = ['background', 'skin', 'eye', 'mouth'] as const;
export type FaceClass = (typeof FACE_CLASSES)[number];

export const CLASS_INDEX: Record<FaceClass, number> = {
  background: 0,
  skin: 1,
  eye: 2,
  mouth: 3,
};

/** Classes that may be counted as face skin in the output mask. */
export const MASKABLE_CLASSES: FaceClass[] = ['skin', 'eye', 'mouth'];

function isMouthRgb(r: number, g: number, b: number): boolean {
  // red clearly dominating both other channels reads as lip tissue
  return r > 1.6 * g && r > 1.6 * b;
}

/** Label each pixel of an aligned crop; returns one class index per pixel. */
export function labelCrop(crop: RgbImage): Uint8Array {
  const { width, height, data } = crop;
  const n = width * height;
  const skinish = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    const j = i * 3;
    if (isSkinRgb(data[j], data[j + 1], data[j + 2])) skinish[i] = 1;
  }

  // flood non-skin from the border; what is left unreached is enclosed
  const outside = new Uint8Array(n);
  const stack = new Int32Array(n);
  let top = 0;
  const push = (p: number) => {
    if (skinish[p] === 0 && outside[p] === 0) {
      outside[p] = 1;
      stack[top++] = p;
    }
  };
  for (let x = 0; x < width; x++) {
    push(x);
    push((height - 1) * width + x);
  }
  for (let y = 0; y < height; y++) {
    push(y * width);
    push(y * width + width - 1);
  }
  while (top > 0) {
    const p = stack[--top];
    const px = p % width;
    const py = (p - px) / width;
    if (px > 0) push(p - 1);
    if (px + 1 < width) push(p + 1);
    if (py > 0) push(p - width);
    if (py + 1 < height) push(p + width);
  }

  const labels = new Uint8Array(n);
  for (let i = 0; i < n; i++) {
    if (skinish[i] !== 0) {
      const j = i * 3;
      labels[i] = isMouthRgb(data[j], data[j + 1], data[j + 2])
        ? CLASS_INDEX.mouth
        : CLASS_INDEX.skin;
    } else if (outside[i] === 0) {
      labels[i] = CLASS_INDEX.eye;
    } else {
      labels[i] = CLASS_INDEX.background;
    }
  }
  return labels;
}

/** Binary mask (0/255) of the pixels whose class is in `include`. */
export function buildMask(labels: Uint8Array, width: number, height: number, include: ReadonlySet<FaceClass>): GrayImage {
  const wanted = new Uint8Array(FACE_CLASSES.length);
  for (const cls of include) {
    wanted[CLASS_INDEX[cls]] = 1;
  }
  const data = new Uint8Array(width * height);
  for (let i = 0; i < labels.length; i++) {
    if (wanted[labels[i]] !== 0) data[i] = 255;
  }
  return { width, height, data };
}

/** Parse a comma-separated class list, e.g. "skin" or "skin,mouth". */
export function parseSkinClasses(spec: string): Set<FaceClass> {
  const out = new Set<FaceClass>();
  for (const raw of spec.split(',')) {
    const name = raw.trim();
    if (name === '') continue;
    if (!(MASKABLE_CLASSES as string[]).includes(name)) {
      throw new Error(
        `unknown skin class ${JSON.stringify(name)}; choose from ${MASKABLE_CLASSES.join(', ')}`
      );
    }
    out.add(name as FaceClass);
  }
  if (out.size === 0) {
    throw new Error('skin class set is empty');
  }
  return out;
}
