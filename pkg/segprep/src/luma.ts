/** Grayscale conversion shared with the downstream histogram tooling. */

/**
 * BT.601 luma of an 8-bit RGB pixel.
 *
 * The expression must be evaluated in IEEE double precision in exactly
 * this order.  Integer reformulations (half-up rounding of the milli-luma
 * sum) disagree on a few thousand exact .5 ties, where the double sum
 * lands just below the tie and floors one lower.  Downstream consumers
 * compute the same expression on doubles, so any "cleaner" rewrite here
 * breaks bit-exact interop.
 */
export function grayscaleLuma(r: number, g: number, b: number): number {
  return Math.min(255, Math.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5));
}

/** Histogram luma values of the masked pixels of an RGB buffer.
 *
 * `rgb` is packed 3 bytes per pixel, `mask` one byte per pixel; a pixel
 * contributes exactly when its mask byte is nonzero.  Returns 256 counts.
 */
export function lumaHistogram(rgb: Uint8Array, mask: Uint8Array): number[] {
  if (rgb.length !== mask.length * 3) {
    throw new Error(`rgb/mask length mismatch: ${rgb.length} vs ${mask.length}`);
  }
  const counts = new Array<number>(256).fill(0);
  for (let i = 0; i < mask.length; i++) {
    if (mask[i] === 0) continue;
    const j = i * 3;
    counts[grayscaleLuma(rgb[j], rgb[j + 1], rgb[j + 2])]++;
  }
  return counts;
}
