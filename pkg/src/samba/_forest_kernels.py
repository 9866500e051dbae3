"""Hot random-forest kernels, as numba/numpy twins.

Both twins of best_split evaluate the identical candidate set (midpoints
between consecutive distinct sorted values) and compute the impurity
decrease with the same sequence of IEEE operations, so the selected
(feature, threshold) is bit-for-bit independent of the backend. The same
holds for forest_apply: per pixel, leaf distributions accumulate in tree
order and are divided by the tree count at the end.
"""

import numpy as np

from .accel import USE_NUMBA


# ---------------------------------------------------------------- numpy twins

def best_split_numpy(X, idx, y0, feats, n_classes):
    """Best split over `feats` for the samples `idx`.

    X: (n_all, F) float64, y0: (n_all,) int64 zero-based classes,
    feats: ascending int64 feature indices.
    Returns (feature, threshold, decrease); feature == -1 means no split
    decreases impurity.
    """
    n = idx.shape[0]
    yl = y0[idx]
    total = np.bincount(yl, minlength=n_classes).astype(np.int64)
    acc = 0.0
    for c in range(n_classes):
        p = total[c] / n
        acc += p * p
    pg = 1.0 - acc

    best_dec = 0.0
    best_f = -1
    best_thr = 0.0
    for f in feats:
        col = X[idx, f]
        order = np.argsort(col, kind="stable")
        cs = col[order]
        if cs[0] == cs[-1]:
            continue
        ysort = yl[order]
        onehot = np.zeros((n, n_classes), dtype=np.int64)
        onehot[np.arange(n), ysort] = 1
        cum = np.cumsum(onehot, axis=0)[:-1]  # left counts at boundary k
        nl = np.arange(1, n, dtype=np.int64)
        nr = n - nl
        a = cs[:-1]
        b = cs[1:]
        thr = (a + b) / 2.0
        valid = (b > a) & (thr > a) & (thr < b)
        if not valid.any():
            continue
        gl_acc = np.zeros(n - 1)
        gr_acc = np.zeros(n - 1)
        for c in range(n_classes):
            pl = cum[:, c] / nl
            gl_acc += pl * pl
            pr = (total[c] - cum[:, c]) / nr
            gr_acc += pr * pr
        dec = pg - (nl / n) * (1.0 - gl_acc) - (nr / n) * (1.0 - gr_acc)
        dec = np.where(valid, dec, -np.inf)
        k = int(np.argmax(dec))  # first max -> lowest threshold
        d = float(dec[k])
        t = float(thr[k])
        if d > 0.0 and (
            best_f == -1
            or d > best_dec
            or (d == best_dec and (f < best_f or (f == best_f and t < best_thr)))
        ):
            best_dec = d
            best_f = int(f)
            best_thr = t
    return best_f, best_thr, best_dec


def forest_apply_numpy(Xp, node_feat, node_thr, node_left, node_right, tree_roots, leaf_dist):
    """Average leaf distributions over all trees for each row of Xp.

    Flattened-forest layout: node_feat >= 0 marks an internal node whose
    children are absolute indices node_left/node_right; at leaves
    (node_feat == -1) node_left holds the row into leaf_dist.
    """
    n = Xp.shape[0]
    n_trees = tree_roots.shape[0]
    k = leaf_dist.shape[1]
    out = np.zeros((n, k))
    rows = np.arange(n)
    for t in range(n_trees):
        cur = np.full(n, tree_roots[t], dtype=np.int64)
        while True:
            feats = node_feat[cur]
            active = feats >= 0
            if not active.any():
                break
            ar = rows[active]
            ac = cur[active]
            go_left = Xp[ar, feats[active]] <= node_thr[ac]
            cur[active] = np.where(go_left, node_left[ac], node_right[ac])
        out += leaf_dist[node_left[cur]]
    out /= n_trees
    return out


# ---------------------------------------------------------------- numba twins

if USE_NUMBA:
    from numba import njit, prange

    @njit(cache=True, nogil=True)
    def best_split_jit(X, idx, y0, feats, n_classes):
        n = idx.shape[0]
        total = np.zeros(n_classes, np.int64)
        for i in range(n):
            total[y0[idx[i]]] += 1
        acc = 0.0
        for c in range(n_classes):
            p = total[c] / n
            acc += p * p
        pg = 1.0 - acc

        best_dec = 0.0
        best_f = -1
        best_thr = 0.0
        col = np.empty(n)
        left = np.empty(n_classes, np.int64)
        for fi in range(feats.shape[0]):
            f = feats[fi]
            for i in range(n):
                col[i] = X[idx[i], f]
            order = np.argsort(col)
            for c in range(n_classes):
                left[c] = 0
            nl = 0
            for k in range(n - 1):
                left[y0[idx[order[k]]]] += 1
                nl += 1
                a = col[order[k]]
                b = col[order[k + 1]]
                if b > a:
                    thr = (a + b) / 2.0
                    if thr <= a or thr >= b:
                        continue
                    nr = n - nl
                    gl_acc = 0.0
                    gr_acc = 0.0
                    for c in range(n_classes):
                        pl = left[c] / nl
                        gl_acc += pl * pl
                        pr = (total[c] - left[c]) / nr
                        gr_acc += pr * pr
                    dec = pg - (nl / n) * (1.0 - gl_acc) - (nr / n) * (1.0 - gr_acc)
                    if dec > 0.0 and (
                        best_f == -1
                        or dec > best_dec
                        or (dec == best_dec and (f < best_f or (f == best_f and thr < best_thr)))
                    ):
                        best_dec = dec
                        best_f = f
                        best_thr = thr
        return best_f, best_thr, best_dec

    @njit(cache=True, nogil=True, parallel=True)
    def forest_apply_jit(Xp, node_feat, node_thr, node_left, node_right, tree_roots, leaf_dist):
        n = Xp.shape[0]
        n_trees = tree_roots.shape[0]
        k = leaf_dist.shape[1]
        out = np.zeros((n, k))
        for p in prange(n):
            for t in range(n_trees):
                node = tree_roots[t]
                while node_feat[node] >= 0:
                    if Xp[p, node_feat[node]] <= node_thr[node]:
                        node = node_left[node]
                    else:
                        node = node_right[node]
                row = node_left[node]
                for c in range(k):
                    out[p, c] += leaf_dist[row, c]
            for c in range(k):
                out[p, c] /= n_trees
        return out

else:  # pragma: no cover - exercised by running the suite with SAMBA_NO_NUMBA=1
    best_split_jit = None
    forest_apply_jit = None
