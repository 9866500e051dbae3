"""Run-length encoding for binary masks (the mask wire format).

Runs are (start, length) pairs over row-major pixel order, sorted by start
and non-overlapping; only true pixels are covered.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RleMask:
    width: int
    height: int
    runs: list = field(default_factory=list)  # [(start, length), ...]

    def __post_init__(self):
        total = self.width * self.height
        prev_end = -1
        for start, length in self.runs:
            if length < 1 or start < 0 or start + length > total:
                raise ValueError("run outside the raster")
            if start <= prev_end:
                raise ValueError("runs must be sorted and non-overlapping")
            prev_end = start + length - 1

    def to_json(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "runs": [[int(s), int(l)] for s, l in self.runs],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "RleMask":
        return cls(
            width=int(doc["width"]),
            height=int(doc["height"]),
            runs=[(int(s), int(l)) for s, l in doc["runs"]],
        )


def encode_mask(mask: np.ndarray) -> RleMask:
    """Boolean (h, w) array -> RleMask."""
    h, w = mask.shape
    flat = np.asarray(mask, dtype=bool).reshape(-1)
    if not flat.any():
        return RleMask(width=w, height=h, runs=[])
    padded = np.concatenate(([False], flat, [False]))
    diff = np.diff(padded.astype(np.int8))
    starts = np.nonzero(diff == 1)[0]
    ends = np.nonzero(diff == -1)[0]
    return RleMask(width=w, height=h, runs=list(zip(starts.tolist(), (ends - starts).tolist())))


def decode_mask(rle: RleMask) -> np.ndarray:
    """RleMask -> boolean (h, w) array."""
    flat = np.zeros(rle.width * rle.height, dtype=bool)
    for start, length in rle.runs:
        flat[start:start + length] = True
    return flat.reshape(rle.height, rle.width)
