import { describe, expect, it } from 'vitest';
import { grayscaleLuma, lumaHistogram } from '../src/luma';
import { stratifiedTriples } from './sampling';

describe('grayscaleLuma', () => {
  it('maps primaries and extremes to the documented values', () => {
    expect(grayscaleLuma(0, 0, 0)).toBe(0);
    expect(grayscaleLuma(255, 255, 255)).toBe(255);
    expect(grayscaleLuma(255, 0, 0)).toBe(76);
    expect(grayscaleLuma(0, 255, 0)).toBe(150);
    expect(grayscaleLuma(0, 0, 255)).toBe(29);
    expect(grayscaleLuma(128, 128, 128)).toBe(128);
  });

  it('floors below exact .5 ties where the double sum lands low', () => {
    // 299*0 + 587*36 + 114*12 = 22500, an exact tie; integer half-up
    // gives 23 but the double expression must give 22
    expect((299 * 0 + 587 * 36 + 114 * 12) % 1000).toBe(500);
    expect(grayscaleLuma(0, 36, 12)).toBe(22);
  });

  it('matches exact integer rounding away from ties over the stratified cube sample', () => {
    const triples = stratifiedTriples();
    expect(triples.length).toBe(4096);
    let ties = 0;
    for (const [r, g, b] of triples) {
      const got = grayscaleLuma(r, g, b);
      expect(got).toBeGreaterThanOrEqual(0);
      expect(got).toBeLessThanOrEqual(255);
      const milli = 299 * r + 587 * g + 114 * b;
      const halfUp = Math.min(255, Math.floor((milli + 500) / 1000));
      if (milli % 1000 === 500) {
        // at a tie the double sum may land just below and floor one lower
        ties++;
        expect([halfUp, halfUp - 1]).toContain(got);
      } else {
        expect(got).toBe(halfUp);
      }
    }
    // ties are rare (about 0.1% of the cube), most samples hit the exact branch
    expect(ties).toBeLessThan(64);
  });
});

describe('lumaHistogram', () => {
  it('counts only masked pixels', () => {
    const rgb = new Uint8Array([255, 0, 0, 0, 255, 0, 0, 0, 255]);
    const mask = new Uint8Array([255, 0, 1]);
    const counts = lumaHistogram(rgb, mask);
    expect(counts[76]).toBe(1);
    expect(counts[150]).toBe(0);
    expect(counts[29]).toBe(1);
    expect(counts.reduce((a, c) => a + c, 0)).toBe(2);
  });

  it('rejects mismatched buffer lengths', () => {
    expect(() => lumaHistogram(new Uint8Array(9), new Uint8Array(2))).toThrow(/mismatch/);
  });
});
