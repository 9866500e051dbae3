#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy twins.

Runs each hot kernel on desk-scale inputs and prints a timing table with
speedups. Requires numba importable (the jit side of each twin); run the
whole suite with SAMBA_NO_NUMBA=1 separately to measure fallback-only
end-to-end behavior.

    python benchmarks/bench_kernels.py [--size 1024] [--repeat 3]
"""

import argparse
import time

import numpy as np

from samba import _filter_kernels as fk
from samba import _forest_kernels as fkern
from samba.accel import HAVE_NUMBA
from samba.features import gaussian_taps
from samba.forest import ForestParams, train_forest
from samba.labels import TrainingSet


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=1024, help="image side length")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if not HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    img = rng.random((args.size, args.size))

    taps = gaussian_taps(4.0)
    r = taps.shape[0] // 2
    pad_rows = np.ascontiguousarray(np.pad(img, ((0, 0), (r, r)), mode="reflect"))
    pad_w2 = np.ascontiguousarray(np.pad(img, 2, mode="reflect"))
    pad_w4 = np.ascontiguousarray(np.pad(img, 4, mode="reflect"))
    kern9 = rng.random((9, 9))
    kern9 /= kern9.sum()

    # forest inputs: synthetic training set and a pixel matrix
    n, n_feat = 20_000, 25
    X = np.ascontiguousarray(rng.random((n, n_feat)))
    y = rng.integers(1, 5, n).astype(np.int64)
    y[:4] = [1, 2, 3, 4]
    ts = TrainingSet(features=X, classes=y, feature_names=[f"f{i}" for i in range(n_feat)])
    model = train_forest(ts, ForestParams(n_trees=20, seed=1))
    nf, nt, nl, nr, roots, dists = model.flat_arrays()
    Xpix = np.ascontiguousarray(rng.random((args.size * args.size // 4, n_feat)))
    idx = np.arange(n, dtype=np.int64)
    feats = np.arange(n_feat, dtype=np.int64)

    cases = [
        ("gaussian row pass (s=4)",
         lambda: fk.correlate_rows_jit(pad_rows, taps),
         lambda: fk.correlate_rows_numpy(pad_rows, taps)),
        ("sobel magnitude",
         lambda: fk.sobel_mag_jit(np.ascontiguousarray(np.pad(img, 1, mode="reflect"))),
         lambda: fk.sobel_mag_numpy(np.pad(img, 1, mode="reflect"))),
        ("window median r=2",
         lambda: fk.window_stat_jit(pad_w2, 2, 3),
         lambda: fk.window_stat_numpy(pad_w2, 2, 3)),
        ("window variance r=2",
         lambda: fk.window_stat_jit(pad_w2, 2, 4),
         lambda: fk.window_stat_numpy(pad_w2, 2, 4)),
        ("dense 9x9 correlation",
         lambda: fk.dense_correlate_jit(pad_w4, kern9),
         lambda: fk.dense_correlate_numpy(pad_w4, kern9)),
        ("best split (20k x 25)",
         lambda: fkern.best_split_jit(X, idx, y - 1, feats, 4),
         lambda: fkern.best_split_numpy(X, idx, y - 1, feats, 4)),
        (f"forest apply ({Xpix.shape[0]} px, 20 trees)",
         lambda: fkern.forest_apply_jit(Xpix, nf, nt, nl, nr, roots, dists),
         lambda: fkern.forest_apply_numpy(Xpix, nf, nt, nl, nr, roots, dists)),
    ]

    print(f"image {args.size}x{args.size}, best of {args.repeat}\n")
    print(f"{'kernel':<34} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for name, jit_fn, np_fn in cases:
        jit_fn()  # compile outside the timed region
        t_jit = _time(jit_fn, args.repeat)
        t_np = _time(np_fn, args.repeat)
        print(f"{name:<34} {t_jit * 1e3:>8.1f}ms {t_np * 1e3:>8.1f}ms {t_np / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
