"""Independent brute-force oracles.

Everything here is deliberately naive (dense convolution, per-pixel
enumeration, exhaustive search, BFS) and shares no code with the engine's
filter/forest kernels; only the border convention (mirror padding) and the
impurity formula are common by definition.
"""

import math
from collections import deque

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


# ------------------------------------------------------------------ filters

def reflect_pad(img, ry, rx):
    return np.pad(img, ((ry, ry), (rx, rx)), mode="reflect")


def dense_correlate(img, kernel):
    """Direct 2-D correlation with mirror padding, tap-by-tap."""
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    p = reflect_pad(img, ry, rx)
    h, w = img.shape
    out = np.zeros((h, w))
    for i in range(kh):
        for j in range(kw):
            out += kernel[i, j] * p[i:i + h, j:j + w]
    return out


def gaussian_kernel_2d(sigma):
    r = math.ceil(3.0 * sigma)
    ys, xs = np.mgrid[-r:r + 1, -r:r + 1]
    k = np.exp(-(xs * xs + ys * ys) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_oracle(img, sigma):
    return dense_correlate(img, gaussian_kernel_2d(sigma))


SOBEL_GX = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_GY = SOBEL_GX.T


def sobel_oracle(img, sigma):
    base = gaussian_oracle(img, sigma) if sigma > 0 else img
    gx = dense_correlate(base, SOBEL_GX)
    gy = dense_correlate(base, SOBEL_GY)
    return np.sqrt(gx * gx + gy * gy)


def hessian_oracle(img, sigma):
    s = gaussian_oracle(img, sigma)
    p = reflect_pad(s, 1, 1)
    h, w = img.shape
    lmax = np.zeros((h, w))
    lmin = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            cy, cx = y + 1, x + 1
            ixx = p[cy, cx - 1] - 2.0 * p[cy, cx] + p[cy, cx + 1]
            iyy = p[cy - 1, cx] - 2.0 * p[cy, cx] + p[cy + 1, cx]
            ixy = (p[cy + 1, cx + 1] - p[cy + 1, cx - 1] - p[cy - 1, cx + 1] + p[cy - 1, cx - 1]) / 4.0
            mean = 0.5 * (ixx + iyy)
            root = math.sqrt((0.5 * (ixx - iyy)) ** 2 + ixy * ixy)
            lmax[y, x] = mean + root
            lmin[y, x] = mean - root
    return lmax, lmin


def dog_oracle(img, sigma_a, sigma_b):
    return gaussian_oracle(img, sigma_b) - gaussian_oracle(img, sigma_a)


def window_stat_oracle(img, radius, stat):
    p = reflect_pad(img, radius, radius)
    h, w = img.shape
    k = 2 * radius + 1
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            win = p[y:y + k, x:x + k].reshape(-1)
            if stat == "mean":
                out[y, x] = win.mean()
            elif stat == "min":
                out[y, x] = win.min()
            elif stat == "max":
                out[y, x] = win.max()
            elif stat == "median":
                out[y, x] = np.median(win)
            else:
                out[y, x] = win.var()
    return out


def membrane_oracle(img, kernels):
    responses = np.stack([dense_correlate(img, k) for k in kernels], axis=0)
    return [
        responses.sum(axis=0),
        responses.mean(axis=0),
        responses.std(axis=0),
        np.median(responses, axis=0),
        responses.max(axis=0),
        responses.min(axis=0),
    ]


# ----------------------------------------------------------------- geometry

def _dist_point_segment(cx, cy, p, q):
    vx, vy = q[0] - p[0], q[1] - p[1]
    l2 = vx * vx + vy * vy
    if l2 == 0.0:
        dx, dy = cx - p[0], cy - p[1]
    else:
        t = max(0.0, min(1.0, ((cx - p[0]) * vx + (cy - p[1]) * vy) / l2))
        dx, dy = cx - (p[0] + t * vx), cy - (p[1] + t * vy)
    return math.hypot(dx, dy)


def brush_oracle(path, radius, width, height):
    """All pixels within `radius` of any path segment, plus rounded vertices."""
    pts = [(float(x), float(y)) for x, y in path]
    segs = list(zip(pts, pts[1:])) or [(pts[0], pts[0])]
    out = set()
    for py in range(height):
        for px in range(width):
            for p, q in segs:
                if _dist_point_segment(px, py, p, q) <= radius:
                    out.add((px, py))
                    break
    for x, y in pts:
        rx, ry = int(math.floor(x + 0.5)), int(math.floor(y + 0.5))
        if 0 <= rx < width and 0 <= ry < height:
            out.add((rx, ry))
    return out


def polygon_oracle(vertices, width, height):
    """Even-odd pixel-center containment; centers on an edge count inside."""
    vs = [(float(x), float(y)) for x, y in vertices]
    n = len(vs)
    out = set()
    for py in range(height):
        for px in range(width):
            cx, cy = px + 0.5, py + 0.5
            inside = False
            on_edge = False
            for i in range(n):
                x1, y1 = vs[i]
                x2, y2 = vs[(i + 1) % n]
                if (y1 > cy) != (y2 > cy):
                    t = (cy - y1) / (y2 - y1)
                    if cx < x1 + t * (x2 - x1):
                        inside = not inside
                cross = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1)
                if (
                    abs(cross) <= 1e-9
                    and min(x1, x2) - 1e-9 <= cx <= max(x1, x2) + 1e-9
                    and min(y1, y2) - 1e-9 <= cy <= max(y1, y2) + 1e-9
                ):
                    on_edge = True
            if inside or on_edge:
                out.add((px, py))
    return out


def flood_oracle(img, seed_xy, tolerance):
    """BFS 4-connected flood fill on |I - I(seed)| <= tolerance."""
    h, w = img.shape
    sx, sy = seed_xy
    seed_val = img[sy, sx]
    mask = np.zeros((h, w), dtype=bool)
    mask[sy, sx] = True
    queue = deque([(sx, sy)])
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < w and 0 <= ny < h and not mask[ny, nx]:
                if abs(img[ny, nx] - seed_val) <= tolerance:
                    mask[ny, nx] = True
                    queue.append((nx, ny))
    return mask


# ------------------------------------------------------------------- forest

def gini_py(counts, n):
    acc = 0.0
    for c in counts:
        p = c / n
        acc += p * p
    return 1.0 - acc


def exhaustive_best_split(X, y0, n_classes, features=None):
    """Try every (feature, midpoint) pair by full recount.

    Same tie rule as the engine: higher decrease, then lower feature index,
    then lower threshold. Returns (feature, threshold, decrease) or None.
    """
    n, n_features = X.shape
    feats = range(n_features) if features is None else features
    total = [0] * n_classes
    for c in y0:
        total[c] += 1
    pg = gini_py(total, n)
    best = None
    for f in feats:
        vals = sorted(set(X[:, f].tolist()))
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2.0
            if thr <= a or thr >= b:
                continue
            left = [0] * n_classes
            nl = 0
            for i in range(n):
                if X[i, f] <= thr:
                    left[y0[i]] += 1
                    nl += 1
            nr = n - nl
            if nl == 0 or nr == 0:
                continue
            gl_acc = 0.0
            gr_acc = 0.0
            for c in range(n_classes):
                pl = left[c] / nl
                gl_acc += pl * pl
                pr = (total[c] - left[c]) / nr
                gr_acc += pr * pr
            dec = pg - (nl / n) * (1.0 - gl_acc) - (nr / n) * (1.0 - gr_acc)
            if dec > 0.0 and (
                best is None
                or dec > best[2]
                or (dec == best[2] and (f < best[0] or (f == best[0] and thr < best[1])))
            ):
                best = (f, thr, dec)
    return best


def tree_predict_oracle(nodes, vector):
    """Walk a serialized preorder node list; returns the leaf's distribution."""
    i = 0
    while "counts" not in nodes[i]:
        if vector[nodes[i]["feature"]] <= nodes[i]["threshold"]:
            i = nodes[i]["left"]
        else:
            i = nodes[i]["right"]
    counts = nodes[i]["counts"]
    s = sum(counts)
    return [c / s for c in counts]


# --------------------------------------------------------------------- rng

def splitmix_reference(seed, count):
    """Pure-int SplitMix64 stream (independent of the numpy implementation)."""
    out = []
    state = seed & MASK64
    for _ in range(count):
        state = (state + GAMMA) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out
