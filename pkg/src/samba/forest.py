"""Random-forest pixel classifier: training, inference, serialization.

Trees store axis-aligned splits in flat preorder arrays (the same layout the
versioned JSON model document uses, see docs/model_format.md). All
randomness comes from per-tree SplitMix64 streams (docs/determinism.md), so
a (TrainingSet, ForestParams) pair determines the model byte-for-byte, no
matter how many workers train it.
"""

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _forest_kernels as fkern
from . import rng
from .accel import pick
from .errors import (
    DimensionMismatch,
    EmptyCounts,
    EmptyTrainingSet,
    FeatureMismatch,
    MalformedModel,
    UnsupportedVersion,
)
from .features import FeatureStack
from .labels import TrainingSet

_best_split = pick(fkern.best_split_jit, fkern.best_split_numpy)
_forest_apply = pick(fkern.forest_apply_jit, fkern.forest_apply_numpy)

MODEL_FORMAT_VERSION = 1


@dataclass
class ForestParams:
    n_trees: int = 100
    max_depth: int = 25
    min_samples_split: int = 2
    features_per_split: int | None = None  # None -> ceil(sqrt(F)) at train time
    seed: int = 42

    def validate(self, n_features: int | None = None):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.features_per_split is not None:
            if self.features_per_split < 1:
                raise ValueError("features_per_split must be >= 1")
            if n_features is not None and self.features_per_split > n_features:
                raise ValueError("features_per_split exceeds feature count")

    def resolved(self, n_features: int) -> "ForestParams":
        fps = self.features_per_split
        if fps is None:
            fps = math.ceil(math.sqrt(n_features))
        p = replace(self, features_per_split=int(fps))
        p.validate(n_features)
        return p


@dataclass
class Tree:
    """One decision tree in flat preorder arrays.

    feature[i] >= 0: internal node (threshold/left/right valid);
    feature[i] == -1: leaf, left[i] is the row into `counts`.
    """

    feature: np.ndarray  # (n_nodes,) int32
    threshold: np.ndarray  # (n_nodes,) float64
    left: np.ndarray  # (n_nodes,) int32
    right: np.ndarray  # (n_nodes,) int32
    counts: np.ndarray  # (n_leaves, K) int64

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


@dataclass
class RandomForestModel:
    trees: list
    n_classes: int
    feature_names: list
    params: ForestParams

    def __post_init__(self):
        self._flat = None

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def flat_arrays(self):
        """Concatenated node arrays + normalized leaf distributions (cached)."""
        if self._flat is None:
            feats, thrs, lefts, rights, roots = [], [], [], [], []
            dists = []
            node_base = 0
            leaf_base = 0
            for t in self.trees:
                roots.append(node_base)
                is_leaf = t.feature < 0
                feats.append(t.feature)
                thrs.append(t.threshold)
                lf = t.left.astype(np.int64)
                rt = t.right.astype(np.int64)
                lf = np.where(is_leaf, lf + leaf_base, lf + node_base)
                rt = np.where(is_leaf, rt, rt + node_base)
                lefts.append(lf)
                rights.append(rt)
                sums = t.counts.sum(axis=1, keepdims=True).astype(np.float64)
                dists.append(t.counts / sums)
                node_base += t.n_nodes
                leaf_base += t.counts.shape[0]
            self._flat = (
                np.concatenate(feats).astype(np.int64),
                np.concatenate(thrs),
                np.concatenate(lefts),
                np.concatenate(rights),
                np.asarray(roots, dtype=np.int64),
                np.ascontiguousarray(np.concatenate(dists, axis=0)),
            )
        return self._flat


@dataclass
class SegmentationResult:
    class_map: np.ndarray  # (h, w) uint8, values 1..K
    probabilities: np.ndarray  # (h, w, K) float64
    uncertainty: np.ndarray  # (h, w) float64, 1 - max probability


def gini(counts) -> float:
    """CART impurity 1 - sum((n_i/n)^2)."""
    arr = np.asarray(counts, dtype=np.int64)
    n = int(arr.sum())
    if n < 1:
        raise EmptyCounts("counts sum to zero")
    acc = 0.0
    for c in arr:
        p = c / n
        acc += p * p
    return 1.0 - acc


def best_split(X, y, feature_subset, n_classes: int | None = None):
    """Best (feature, threshold, impurity_decrease) or None.

    Thresholds are midpoints between consecutive distinct sorted values;
    ties break to the lower feature index, then the lower threshold.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1 if y.size else 1
    feats = np.asarray(sorted(feature_subset), dtype=np.int64)
    idx = np.arange(X.shape[0], dtype=np.int64)
    f, thr, dec = _best_split(X, idx, y, feats, n_classes)
    if f < 0:
        return None
    return int(f), float(thr), float(dec)


def _grow_tree(X, y0, boot, stream, params, n_classes):
    """Grow one tree depth-first; returns flat preorder arrays."""
    feature, threshold, left, right = [], [], [], []
    counts_rows = []
    n_features = X.shape[1]
    fps = params.features_per_split

    def make_leaf(idx):
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(len(counts_rows))
        right.append(-1)
        counts_rows.append(np.bincount(y0[idx], minlength=n_classes).astype(np.int64))
        return node

    def grow(idx, depth):
        node_counts = np.bincount(y0[idx], minlength=n_classes)
        if (
            depth >= params.max_depth
            or idx.shape[0] < params.min_samples_split
            or np.count_nonzero(node_counts) <= 1
        ):
            return make_leaf(idx)
        feats = stream.subset(n_features, fps)
        f, thr, _dec = _best_split(X, idx, y0, feats, n_classes)
        if f < 0:
            return make_leaf(idx)
        node = len(feature)
        feature.append(f)
        threshold.append(thr)
        left.append(-1)
        right.append(-1)
        go_left = X[idx, f] <= thr
        left[node] = grow(idx[go_left], depth + 1)
        right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(boot, 0)
    return Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        counts=np.vstack(counts_rows),
    )


def train_forest(ts: TrainingSet, params: ForestParams | None = None, n_workers: int = 1) -> RandomForestModel:
    """Train on bootstrap resamples with per-node random feature subsets.

    Bit-reproducible for fixed (ts, params) regardless of n_workers: every
    tree draws from its own seeded stream and trees assemble in index order.
    """
    if ts.n_samples == 0:
        raise EmptyTrainingSet("no training samples")
    params = (params or ForestParams()).resolved(ts.features.shape[1])
    X = ts.features
    y0 = ts.classes - 1
    n_classes = int(ts.classes.max())
    n = ts.n_samples

    def build_one(t):
        boot = rng.bootstrap_indices(params.seed, t, n)
        stream = rng.SplitMix64(rng.tree_seed(params.seed, t))
        stream.skip(n)  # bootstrap consumed the first n outputs
        return _grow_tree(X, y0, boot, stream, params, n_classes)

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as ex:
            trees = list(ex.map(build_one, range(params.n_trees)))
    else:
        trees = [build_one(t) for t in range(params.n_trees)]
    return RandomForestModel(
        trees=trees,
        n_classes=n_classes,
        feature_names=list(ts.feature_names),
        params=params,
    )


def predict_proba_batch(model: RandomForestModel, X: np.ndarray) -> np.ndarray:
    """(n, K) class distributions: average of normalized leaf counts."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"expected {model.n_features} features, got {X.shape[1] if X.ndim == 2 else X.shape}"
        )
    nf, nt, nl, nr, roots, dists = model.flat_arrays()
    return _forest_apply(X, nf, nt, nl, nr, roots, dists)


def predict_proba(model: RandomForestModel, vector) -> np.ndarray:
    """Class distribution for one feature vector."""
    v = np.asarray(vector, dtype=np.float64).reshape(1, -1)
    if v.shape[1] != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {v.shape[1]}")
    return predict_proba_batch(model, v)[0]


def segment(model: RandomForestModel, stack: FeatureStack) -> SegmentationResult:
    """Classify every pixel; ties go to the lowest class id."""
    if list(stack.names) != list(model.feature_names):
        raise FeatureMismatch(
            "feature stack does not match the classifier's training configuration"
        )
    h, w = stack.height, stack.width
    probs = predict_proba_batch(model, stack.data.reshape(h * w, stack.n_features))
    class_map = (np.argmax(probs, axis=1) + 1).astype(np.uint8).reshape(h, w)
    uncertainty = (1.0 - probs.max(axis=1)).reshape(h, w)
    return SegmentationResult(
        class_map=class_map,
        probabilities=probs.reshape(h, w, model.n_classes),
        uncertainty=uncertainty,
    )


def train_accuracy(model: RandomForestModel, ts: TrainingSet) -> float:
    """Resubstitution accuracy on the training samples."""
    probs = predict_proba_batch(model, ts.features)
    pred = np.argmax(probs, axis=1) + 1
    return float(np.mean(pred == ts.classes))


# ------------------------------------------------------------- serialization

def serialize_model(model: RandomForestModel) -> bytes:
    """Versioned JSON document; byte-stable for a given model."""
    trees_doc = []
    for t in model.trees:
        nodes = []
        for i in range(t.n_nodes):
            if t.feature[i] >= 0:
                nodes.append(
                    {
                        "feature": int(t.feature[i]),
                        "threshold": float(t.threshold[i]),
                        "left": int(t.left[i]),
                        "right": int(t.right[i]),
                    }
                )
            else:
                nodes.append({"counts": [int(c) for c in t.counts[t.left[i]]]})
        trees_doc.append(nodes)
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "n_classes": model.n_classes,
        "feature_names": list(model.feature_names),
        "params": {
            "n_trees": model.params.n_trees,
            "max_depth": model.params.max_depth,
            "min_samples_split": model.params.min_samples_split,
            "features_per_split": model.params.features_per_split,
            "seed": model.params.seed,
        },
        "trees": trees_doc,
    }
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def _require(cond, msg):
    if not cond:
        raise MalformedModel(msg)


def deserialize_model(data: bytes) -> RandomForestModel:
    """Parse and validate a model document (round-trip inverse of serialize)."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedModel(f"not a valid model document: {e}") from None
    _require(isinstance(doc, dict), "model document must be an object")
    version = doc.get("format_version")
    _require(version is not None, "missing format_version")
    if version != MODEL_FORMAT_VERSION:
        raise UnsupportedVersion(f"format_version {version!r} not supported")

    try:
        n_classes = int(doc["n_classes"])
        names = list(doc["feature_names"])
        p = doc["params"]
        params = ForestParams(
            n_trees=int(p["n_trees"]),
            max_depth=int(p["max_depth"]),
            min_samples_split=int(p["min_samples_split"]),
            features_per_split=int(p["features_per_split"]),
            seed=int(p["seed"]),
        )
        trees_doc = doc["trees"]
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedModel(f"missing or invalid field: {e}") from None
    _require(n_classes >= 1, "n_classes must be >= 1")
    _require(len(names) >= 1 and all(isinstance(s, str) for s in names), "bad feature_names")
    _require(isinstance(trees_doc, list) and len(trees_doc) >= 1, "trees must be non-empty")

    n_features = len(names)
    trees = []
    for nodes in trees_doc:
        _require(isinstance(nodes, list) and len(nodes) >= 1, "empty tree")
        n_nodes = len(nodes)
        feature = np.full(n_nodes, -1, dtype=np.int32)
        threshold = np.zeros(n_nodes, dtype=np.float64)
        left = np.full(n_nodes, -1, dtype=np.int32)
        right = np.full(n_nodes, -1, dtype=np.int32)
        counts_rows = []
        refs = np.zeros(n_nodes, dtype=np.int64)
        for i, nd in enumerate(nodes):
            _require(isinstance(nd, dict), "node must be an object")
            if "counts" in nd:
                cts = nd["counts"]
                _require(
                    isinstance(cts, list) and len(cts) == n_classes,
                    "leaf counts length must equal n_classes",
                )
                arr = np.asarray(cts, dtype=np.int64)
                _require((arr >= 0).all() and arr.sum() >= 1, "leaf counts must sum >= 1")
                left[i] = len(counts_rows)
                counts_rows.append(arr)
            else:
                try:
                    f = int(nd["feature"])
                    thr = float(nd["threshold"])
                    lf = int(nd["left"])
                    rt = int(nd["right"])
                except (KeyError, TypeError, ValueError) as e:
                    raise MalformedModel(f"bad split node: {e}") from None
                _require(0 <= f < n_features, "split feature index out of range")
                _require(np.isfinite(thr), "split threshold must be finite")
                _require(i < lf < n_nodes and i < rt < n_nodes, "child index out of preorder range")
                _require(lf != rt, "split children must differ")
                feature[i] = f
                threshold[i] = thr
                left[i] = lf
                right[i] = rt
                refs[lf] += 1
                refs[rt] += 1
        _require(refs[0] == 0 and (refs[1:] == 1).all(), "nodes must form a preorder tree")
        trees.append(
            Tree(
                feature=feature,
                threshold=threshold,
                left=left,
                right=right,
                counts=np.vstack(counts_rows),
            )
        )
    return RandomForestModel(trees=trees, n_classes=n_classes, feature_names=names, params=params)
