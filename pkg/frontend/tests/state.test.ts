import { describe, expect, it } from "vitest";

import {
  BRUSH_RADIUS_MAX,
  canClosePolygon,
  classColor,
  cycleScale,
  initialState,
  setActiveClass,
  setBrushRadius,
  setOpacity,
} from "../src/state.js";

describe("ui state", () => {
  it("three right-clicks return to the initial scale", () => {
    let s = initialState();
    const start = s.scaleIndex;
    s = cycleScale(cycleScale(cycleScale(s)));
    expect(s.scaleIndex).toBe(start);
    expect(cycleScale(s).scaleIndex).toBe((start + 1) % 3);
  });

  it("brush radius clamps to 0..50", () => {
    const s = initialState();
    expect(setBrushRadius(s, -5).brushRadius).toBe(0);
    expect(setBrushRadius(s, 17.6).brushRadius).toBe(18);
    expect(setBrushRadius(s, 999).brushRadius).toBe(BRUSH_RADIUS_MAX);
  });

  it("opacity clamps to [0, 1]", () => {
    const s = initialState();
    expect(setOpacity(s, -1).overlayOpacity).toBe(0);
    expect(setOpacity(s, 0.35).overlayOpacity).toBe(0.35);
    expect(setOpacity(s, 3).overlayOpacity).toBe(1);
  });

  it("rejects closing a polygon with fewer than 3 vertices", () => {
    expect(canClosePolygon([])).toBe(false);
    expect(canClosePolygon([[1, 1], [2, 2]])).toBe(false);
    expect(canClosePolygon([[1, 1], [2, 2], [3, 1]])).toBe(true);
  });

  it("active class stays within the known classes", () => {
    const s = initialState(); // 2 classes
    expect(setActiveClass(s, 2).activeClass).toBe(2);
    expect(setActiveClass(s, 3).activeClass).toBe(s.activeClass);
    expect(setActiveClass(s, 0).activeClass).toBe(s.activeClass);
  });

  it("palette gives distinct colors for the six base classes", () => {
    const seen = new Set<string>();
    for (let c = 1; c <= 6; c++) seen.add(classColor(c).join(","));
    expect(seen.size).toBe(6);
    // beyond the palette still deterministic
    expect(classColor(42)).toEqual(classColor(42));
  });
});
