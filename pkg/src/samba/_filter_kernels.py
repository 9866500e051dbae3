"""Hot filter-bank kernels, as numba/numpy twins.

Every kernel takes a pre-padded float64 array (padding is always done with
np.pad(..., mode="reflect") by the caller so both twins share one border
convention) and returns the valid region. The numba versions are scalar
loops; the numpy versions accumulate taps in the same order, so a given
output pixel sees the identical sequence of IEEE operations on both paths.

Stat codes for window_stat: 0=mean 1=min 2=max 3=median 4=variance.
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .accel import USE_NUMBA

STAT_MEAN, STAT_MIN, STAT_MAX, STAT_MEDIAN, STAT_VARIANCE = 0, 1, 2, 3, 4

# Cap on elements materialized per chunk in the numpy window-stat fallback.
_CHUNK_ELEMS = 4_000_000


# ---------------------------------------------------------------- numpy twins

def correlate_rows_numpy(padded, taps):
    w = padded.shape[1] - taps.shape[0] + 1
    acc = taps[0] * padded[:, 0:w]
    for i in range(1, taps.shape[0]):
        acc += taps[i] * padded[:, i:i + w]
    return acc


def correlate_cols_numpy(padded, taps):
    h = padded.shape[0] - taps.shape[0] + 1
    acc = taps[0] * padded[0:h, :]
    for i in range(1, taps.shape[0]):
        acc += taps[i] * padded[i:i + h, :]
    return acc


def sobel_mag_numpy(p):
    h, w = p.shape[0] - 2, p.shape[1] - 2
    gx = (
        p[0:h, 2:w + 2] - p[0:h, 0:w]
        + 2.0 * (p[1:h + 1, 2:w + 2] - p[1:h + 1, 0:w])
        + p[2:h + 2, 2:w + 2] - p[2:h + 2, 0:w]
    )
    gy = (
        p[2:h + 2, 0:w] - p[0:h, 0:w]
        + 2.0 * (p[2:h + 2, 1:w + 1] - p[0:h, 1:w + 1])
        + p[2:h + 2, 2:w + 2] - p[0:h, 2:w + 2]
    )
    return np.sqrt(gx * gx + gy * gy)


def hessian_eigen_numpy(p):
    h, w = p.shape[0] - 2, p.shape[1] - 2
    c = p[1:h + 1, 1:w + 1]
    ixx = p[1:h + 1, 0:w] - 2.0 * c + p[1:h + 1, 2:w + 2]
    iyy = p[0:h, 1:w + 1] - 2.0 * c + p[2:h + 2, 1:w + 1]
    ixy = (p[2:h + 2, 2:w + 2] - p[2:h + 2, 0:w] - p[0:h, 2:w + 2] + p[0:h, 0:w]) / 4.0
    mean = 0.5 * (ixx + iyy)
    root = np.sqrt((0.5 * (ixx - iyy)) ** 2 + ixy * ixy)
    return mean + root, mean - root


def window_stat_numpy(p, radius, stat):
    k = 2 * radius + 1
    h, w = p.shape[0] - 2 * radius, p.shape[1] - 2 * radius
    view = sliding_window_view(p, (k, k))
    if stat == STAT_MEAN:
        return view.mean(axis=(2, 3))
    if stat == STAT_MIN:
        return view.min(axis=(2, 3))
    if stat == STAT_MAX:
        return view.max(axis=(2, 3))
    # median/variance materialize windows; chunk rows to bound memory
    out = np.empty((h, w))
    rows = max(1, _CHUNK_ELEMS // (w * k * k))
    for y0 in range(0, h, rows):
        y1 = min(h, y0 + rows)
        block = view[y0:y1].reshape(y1 - y0, w, k * k)
        if stat == STAT_MEDIAN:
            out[y0:y1] = np.median(block, axis=2)
        else:
            out[y0:y1] = np.maximum(block.var(axis=2), 0.0)
    return out


def dense_correlate_numpy(p, kern):
    kh, kw = kern.shape
    h, w = p.shape[0] - kh + 1, p.shape[1] - kw + 1
    acc = np.zeros((h, w))
    for i in range(kh):
        for j in range(kw):
            acc += kern[i, j] * p[i:i + h, j:j + w]
    return acc


# ---------------------------------------------------------------- numba twins

if USE_NUMBA:
    from numba import njit, prange

    @njit(cache=True, nogil=True, parallel=True)
    def correlate_rows_jit(padded, taps):
        h = padded.shape[0]
        w = padded.shape[1] - taps.shape[0] + 1
        out = np.empty((h, w))
        for y in prange(h):
            for x in range(w):
                s = taps[0] * padded[y, x]
                for i in range(1, taps.shape[0]):
                    s += taps[i] * padded[y, x + i]
                out[y, x] = s
        return out

    @njit(cache=True, nogil=True, parallel=True)
    def correlate_cols_jit(padded, taps):
        h = padded.shape[0] - taps.shape[0] + 1
        w = padded.shape[1]
        out = np.empty((h, w))
        for y in prange(h):
            for x in range(w):
                s = taps[0] * padded[y, x]
                for i in range(1, taps.shape[0]):
                    s += taps[i] * padded[y + i, x]
                out[y, x] = s
        return out

    @njit(cache=True, nogil=True, parallel=True)
    def sobel_mag_jit(p):
        h = p.shape[0] - 2
        w = p.shape[1] - 2
        out = np.empty((h, w))
        for y in prange(h):
            for x in range(w):
                gx = (
                    p[y, x + 2] - p[y, x]
                    + 2.0 * (p[y + 1, x + 2] - p[y + 1, x])
                    + p[y + 2, x + 2] - p[y + 2, x]
                )
                gy = (
                    p[y + 2, x] - p[y, x]
                    + 2.0 * (p[y + 2, x + 1] - p[y, x + 1])
                    + p[y + 2, x + 2] - p[y, x + 2]
                )
                out[y, x] = math.sqrt(gx * gx + gy * gy)
        return out

    @njit(cache=True, nogil=True, parallel=True)
    def hessian_eigen_jit(p):
        h = p.shape[0] - 2
        w = p.shape[1] - 2
        lmax = np.empty((h, w))
        lmin = np.empty((h, w))
        for y in prange(h):
            for x in range(w):
                c = p[y + 1, x + 1]
                ixx = p[y + 1, x] - 2.0 * c + p[y + 1, x + 2]
                iyy = p[y, x + 1] - 2.0 * c + p[y + 2, x + 1]
                ixy = (p[y + 2, x + 2] - p[y + 2, x] - p[y, x + 2] + p[y, x]) / 4.0
                mean = 0.5 * (ixx + iyy)
                hd = 0.5 * (ixx - iyy)
                root = math.sqrt(hd * hd + ixy * ixy)
                lmax[y, x] = mean + root
                lmin[y, x] = mean - root
        return lmax, lmin

    @njit(cache=True, nogil=True, parallel=True)
    def window_stat_jit(p, radius, stat):
        k = 2 * radius + 1
        cnt = k * k
        h = p.shape[0] - 2 * radius
        w = p.shape[1] - 2 * radius
        out = np.empty((h, w))
        for y in prange(h):
            buf = np.empty(cnt)
            for x in range(w):
                if stat == 0:
                    s = 0.0
                    for i in range(k):
                        for j in range(k):
                            s += p[y + i, x + j]
                    out[y, x] = s / cnt
                elif stat == 1:
                    m = p[y, x]
                    for i in range(k):
                        for j in range(k):
                            if p[y + i, x + j] < m:
                                m = p[y + i, x + j]
                    out[y, x] = m
                elif stat == 2:
                    m = p[y, x]
                    for i in range(k):
                        for j in range(k):
                            if p[y + i, x + j] > m:
                                m = p[y + i, x + j]
                    out[y, x] = m
                elif stat == 3:
                    # insertion sort: beats both np.sort and per-pixel
                    # partition at these window sizes
                    idx = 0
                    for i in range(k):
                        for j in range(k):
                            v = p[y + i, x + j]
                            pos = idx
                            while pos > 0 and buf[pos - 1] > v:
                                buf[pos] = buf[pos - 1]
                                pos -= 1
                            buf[pos] = v
                            idx += 1
                    out[y, x] = buf[cnt // 2]
                else:
                    s = 0.0
                    for i in range(k):
                        for j in range(k):
                            s += p[y + i, x + j]
                    m = s / cnt
                    s2 = 0.0
                    for i in range(k):
                        for j in range(k):
                            d = p[y + i, x + j] - m
                            s2 += d * d
                    v = s2 / cnt
                    out[y, x] = v if v > 0.0 else 0.0
        return out

    @njit(cache=True, nogil=True, parallel=True)
    def dense_correlate_jit(p, kern):
        kh, kw = kern.shape
        h = p.shape[0] - kh + 1
        w = p.shape[1] - kw + 1
        out = np.empty((h, w))
        for y in prange(h):
            for x in range(w):
                s = 0.0
                for i in range(kh):
                    for j in range(kw):
                        s += kern[i, j] * p[y + i, x + j]
                out[y, x] = s
        return out

else:  # pragma: no cover - exercised by running the suite with SAMBA_NO_NUMBA=1
    correlate_rows_jit = None
    correlate_cols_jit = None
    sobel_mag_jit = None
    hessian_eigen_jit = None
    window_stat_jit = None
    dense_correlate_jit = None
