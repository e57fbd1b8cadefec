import { describe, expect, it } from "vitest";

import { divergingColor, LINE_COLORS, sequentialColor, toHex } from "../src/colormap.js";

describe("divergingColor", () => {
  it("is exactly white at zero, whatever the data range", () => {
    for (const [lo, hi] of [
      [-1, 1],
      [-0.163, 0.318],
      [-5, 0.01],
      [-1e-4, 2],
    ]) {
      expect(divergingColor(0, lo, hi)).toEqual([255, 255, 255]);
    }
  });

  it("is blue-dominant on the negative side, red-dominant on the positive", () => {
    const neg = divergingColor(-0.3, -0.3, 0.3);
    const pos = divergingColor(0.3, -0.3, 0.3);
    expect(neg[2]).toBeGreaterThan(neg[0]);
    expect(pos[0]).toBeGreaterThan(pos[2]);
  });

  it("scales symmetrically so lopsided data keep zero at white", () => {
    // half-range is max(|lo|, |hi|); equal magnitudes get mirror-class colors
    const a = divergingColor(-0.2, -0.2, 0.9);
    const b = divergingColor(-0.2, -0.9, 0.2);
    expect(a).toEqual(b);
  });

  it("clamps out-of-range values and keeps channels in byte range", () => {
    for (let k = -30; k <= 30; ++k) {
      const c = divergingColor(k / 10, -1, 1);
      for (const v of c) {
        expect(Number.isInteger(v)).toBe(true);
        expect(v).toBeGreaterThanOrEqual(0);
        expect(v).toBeLessThanOrEqual(255);
      }
      // white is reserved for the neutral point
      if (Math.abs(k) >= 2) {
        expect(c).not.toEqual([255, 255, 255]);
      }
    }
  });
});

describe("sequentialColor", () => {
  it("hits the ramp ends", () => {
    expect(sequentialColor(0, 0, 1)).toEqual([13, 8, 135]);
    expect(sequentialColor(1, 0, 1)).toEqual([240, 249, 33]);
  });

  it("degrades to the low end when the range collapses", () => {
    expect(sequentialColor(3, 3, 3)).toEqual([13, 8, 135]);
  });
});

describe("toHex", () => {
  it("formats bytes with padding", () => {
    expect(toHex([255, 255, 255])).toBe("#ffffff");
    expect(toHex([5, 48, 97])).toBe("#053061");
    expect(toHex([0, 0, 0])).toBe("#000000");
  });
});

describe("LINE_COLORS", () => {
  it("are distinct hex colors", () => {
    expect(new Set(LINE_COLORS).size).toBe(LINE_COLORS.length);
    for (const c of LINE_COLORS) {
      expect(c).toMatch(/^#[0-9a-f]{6}$/);
    }
  });
});
