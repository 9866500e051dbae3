"""Deterministic 64-bit SplitMix-style generator.

All randomness that affects persisted artifacts (bootstrap resamples, per-node
feature subsets, training-set subsampling) flows through this generator so
"same seed, same model" holds byte-for-byte across runs, worker counts and
kernel backends. The exact sequence is documented in docs/determinism.md:

    out_k = mix64((seed + (k + 1) * GAMMA) mod 2**64),  k = 0, 1, 2, ...

with GAMMA = 0x9E3779B97F4A7C15 and mix64 the standard SplitMix64 finalizer.
Bounded draws use plain 64-bit modulo; the bias is negligible at the ranges
used here (< 2**-40) and keeping the rule trivial makes it reproducible in
any language.
"""

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_MIX_MUL1 = 0xBF58476D1CE4E5B9
_MIX_MUL2 = 0x94D049BB133111EB

# Seed base for the per-class training-set subsample streams ("SAMBA" in ASCII).
SUBSAMPLE_SEED = 0x53414D4241


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX_MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX_MUL2) & MASK64
    return z ^ (z >> 31)


def stream_outputs(seed: int, count: int) -> np.ndarray:
    """First `count` outputs of the stream for `seed`, as uint64 (vectorized)."""
    if count == 0:
        return np.empty(0, dtype=np.uint64)
    with np.errstate(over="ignore"):
        k = np.arange(1, count + 1, dtype=np.uint64)
        z = np.uint64(seed & MASK64) + k * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_MUL2)
        return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Scalar stream; produces the same sequence as stream_outputs()."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + GAMMA) & MASK64
        return mix64(self._state)

    def skip(self, count: int) -> None:
        """Advance past `count` outputs without generating them."""
        self._state = (self._state + count * GAMMA) & MASK64

    def next_below(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def subset(self, n: int, k: int) -> np.ndarray:
        """k distinct values from range(n): partial Fisher-Yates, returned sorted."""
        if not 1 <= k <= n:
            raise ValueError("need 1 <= k <= n")
        arr = np.arange(n, dtype=np.int64)
        for i in range(k):
            j = i + self.next_below(n - i)
            arr[i], arr[j] = arr[j], arr[i]
        out = arr[:k].copy()
        out.sort()
        return out


def tree_seed(seed: int, tree_index: int) -> int:
    """Seed of tree t's private stream: output t of the forest-seed stream."""
    return mix64((seed + (tree_index + 1) * GAMMA) & MASK64)


def bootstrap_indices(seed: int, tree_index: int, n: int) -> np.ndarray:
    """n draws with replacement from range(n) for one tree (vectorized)."""
    outs = stream_outputs(tree_seed(seed, tree_index), n)
    return (outs % np.uint64(n)).astype(np.int64)


def subsample_keys(class_id: int, n: int) -> np.ndarray:
    """Ranking keys for the per-class training-set cap subsample."""
    return stream_outputs(mix64((SUBSAMPLE_SEED + class_id * GAMMA) & MASK64), n)
