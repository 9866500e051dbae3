/** Pure pixel-buffer compositing for the segmentation / uncertainty /
 * mask-preview overlays. All buffers are RGBA (4 bytes per pixel). */

import { classColor } from "./state.js";

/** Alpha-blend the class-colored segmentation over the base image.
 * opacity 0 returns the base bytes; opacity 1 the pure class colors. */
export function compositeSegmentation(
  base: Uint8ClampedArray,
  classMap: Uint8Array,
  opacity: number,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(base.length);
  const n = classMap.length;
  for (let i = 0; i < n; i++) {
    const [r, g, b] = classColor(classMap[i]);
    const j = i * 4;
    out[j] = base[j] * (1 - opacity) + r * opacity;
    out[j + 1] = base[j + 1] * (1 - opacity) + g * opacity;
    out[j + 2] = base[j + 2] * (1 - opacity) + b * opacity;
    out[j + 3] = 255;
  }
  return out;
}

/** Uncertainty (0..255 per pixel) as a translucent heat layer: transparent
 * where certain, hot where uncertain. Pure function of its inputs. */
export function uncertaintyHeat(values: Uint8Array): Uint8ClampedArray {
  const out = new Uint8ClampedArray(values.length * 4);
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    const j = i * 4;
    out[j] = 255;
    out[j + 1] = Math.max(0, 160 - v);
    out[j + 2] = 40;
    out[j + 3] = v; // alpha follows the uncertainty itself
  }
  return out;
}

/** Translucent single-color tint of a binary mask (hover preview). */
export function maskTint(
  mask: Uint8Array,
  color: [number, number, number],
  alpha = 140,
): Uint8ClampedArray {
  const out = new Uint8ClampedArray(mask.length * 4);
  for (let i = 0; i < mask.length; i++) {
    if (mask[i]) {
      const j = i * 4;
      out[j] = color[0];
      out[j + 1] = color[1];
      out[j + 2] = color[2];
      out[j + 3] = alpha;
    }
  }
  return out;
}
