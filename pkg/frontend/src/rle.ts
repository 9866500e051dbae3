/** Run-length mask decoding (row-major (start, length) runs of true pixels). */

import type { RleMaskDoc } from "./api.js";

/** Decode to a flat Uint8Array of 0/1, length width*height. */
export function decodeRle(doc: RleMaskDoc): Uint8Array {
  const flat = new Uint8Array(doc.width * doc.height);
  for (const [start, length] of doc.runs) {
    flat.fill(1, start, start + length);
  }
  return flat;
}

export function maskArea(doc: RleMaskDoc): number {
  let area = 0;
  for (const [, length] of doc.runs) area += length;
  return area;
}

/** How many of the mask's pixels are 0 (unlabeled) in `labels`. */
export function countUnlabeledInMask(doc: RleMaskDoc, labels: Uint8Array): number {
  let n = 0;
  for (const [start, length] of doc.runs) {
    for (let i = start; i < start + length; i++) {
      if (labels[i] === 0) n++;
    }
  }
  return n;
}
