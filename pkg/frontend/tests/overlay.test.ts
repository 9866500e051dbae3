import { describe, expect, it } from "vitest";

import { compositeSegmentation, maskTint, uncertaintyHeat } from "../src/overlay.js";
import { classColor } from "../src/state.js";

function checkerBase(n: number): Uint8ClampedArray {
  const base = new Uint8ClampedArray(n * 4);
  for (let i = 0; i < n; i++) {
    const v = (i * 37) % 256;
    base.set([v, 255 - v, (v * 3) % 256, 255], i * 4);
  }
  return base;
}

describe("overlay compositing", () => {
  it("opacity 0 renders the raw image", () => {
    const base = checkerBase(16);
    const classes = new Uint8Array(16).fill(2);
    const out = compositeSegmentation(base, classes, 0);
    for (let i = 0; i < 16; i++) {
      expect(out[i * 4]).toBe(base[i * 4]);
      expect(out[i * 4 + 1]).toBe(base[i * 4 + 1]);
      expect(out[i * 4 + 2]).toBe(base[i * 4 + 2]);
      expect(out[i * 4 + 3]).toBe(255);
    }
  });

  it("opacity 1 renders the pure class color map", () => {
    const base = checkerBase(16);
    const classes = new Uint8Array(16);
    for (let i = 0; i < 16; i++) classes[i] = (i % 2) + 1;
    const out = compositeSegmentation(base, classes, 1);
    for (let i = 0; i < 16; i++) {
      const [r, g, b] = classColor(classes[i]);
      expect([out[i * 4], out[i * 4 + 1], out[i * 4 + 2]]).toEqual([r, g, b]);
    }
  });

  it("intermediate opacity blends linearly", () => {
    const base = new Uint8ClampedArray([100, 100, 100, 255]);
    const classes = new Uint8Array([1]);
    const [r] = classColor(1);
    const out = compositeSegmentation(base, classes, 0.5);
    expect(out[0]).toBe(Math.round(100 * 0.5 + r * 0.5));
  });

  it("uncertainty heat is transparent where certain", () => {
    const heat = uncertaintyHeat(new Uint8Array([0, 128, 255]));
    expect(heat[3]).toBe(0);
    expect(heat[7]).toBe(128);
    expect(heat[11]).toBe(255);
  });

  it("mask tint only touches mask pixels", () => {
    const tint = maskTint(new Uint8Array([0, 1, 0, 1]), [10, 20, 30], 99);
    expect(tint[3]).toBe(0);
    expect([tint[4], tint[5], tint[6], tint[7]]).toEqual([10, 20, 30, 99]);
    expect(tint[11]).toBe(0);
  });
});
