import numpy as np
import pytest

from samba.errors import DegeneratePolygon, DimensionMismatch, EmptyPath, NoLabels, OutOfBounds
from samba.features import FeatureConfig, build_feature_stack
from samba.image_io import GrayImage
from samba.labels import (
    CLASS_SAMPLE_CAP,
    LabelDelta,
    LabelMap,
    apply_delta,
    extract_training_set,
    rasterize_brush,
    rasterize_polygon,
)

import oracles


def _pixel_set(delta):
    return {(int(x), int(y)) for x, y in delta.pixels}


# -------------------------------------------------------------------- brush

def test_brush_radius_zero_single_pixel():
    d = rasterize_brush([(10, 10)], 0, 1, 32, 32)
    assert _pixel_set(d) == {(10, 10)}


def test_brush_radius_one_cross():
    d = rasterize_brush([(10, 10)], 1, 1, 32, 32)
    assert _pixel_set(d) == {(10, 10), (9, 10), (11, 10), (10, 9), (10, 11)}
    assert _pixel_set(d) == oracles.brush_oracle([(10, 10)], 1, 32, 32)


def test_brush_two_point_path_superset_of_disks():
    a = _pixel_set(rasterize_brush([(5, 5)], 2, 1, 32, 32))
    b = _pixel_set(rasterize_brush([(12, 9)], 2, 1, 32, 32))
    path = _pixel_set(rasterize_brush([(5, 5), (12, 9)], 2, 1, 32, 32))
    assert a | b <= path
    assert path == oracles.brush_oracle([(5, 5), (12, 9)], 2, 32, 32)


def test_brush_matches_oracle_on_random_paths(rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        path = [(float(rng.uniform(0, 15)), float(rng.uniform(0, 15))) for _ in range(n)]
        radius = float(rng.uniform(0, 3))
        got = _pixel_set(rasterize_brush(path, radius, 1, 16, 16))
        assert got == oracles.brush_oracle(path, radius, 16, 16)


def test_brush_radius_monotone(rng):
    for _ in range(10):
        p = (float(rng.uniform(0, 16)), float(rng.uniform(0, 16)))
        r = float(rng.uniform(0, 4))
        small = _pixel_set(rasterize_brush([p], r, 1, 16, 16))
        large = _pixel_set(rasterize_brush([p], r + 1, 1, 16, 16))
        assert small <= large


def test_brush_clips_to_bounds():
    d = rasterize_brush([(0, 0)], 3, 1, 8, 8)
    assert all(0 <= x < 8 and 0 <= y < 8 for x, y in d.pixels)
    d = rasterize_brush([(-2, 4), (10, 4)], 1, 1, 8, 8)
    assert all(0 <= x < 8 for x, y in d.pixels)


def test_brush_empty_path_rejected():
    with pytest.raises(EmptyPath):
        rasterize_brush([], 1, 1, 8, 8)


# ------------------------------------------------------------------ polygon

def test_polygon_rectangle():
    d = rasterize_polygon([(0, 0), (4, 0), (4, 3), (0, 3)], 1, 32, 32)
    assert _pixel_set(d) == {(x, y) for x in range(4) for y in range(3)}


def test_polygon_collinear_is_empty():
    d = rasterize_polygon([(0, 0), (2, 0), (4, 0)], 1, 8, 8)
    assert d.n_pixels == 0


def test_polygon_orientation_free(rng):
    verts = [(1, 1), (6, 2), (5, 6), (2, 5)]
    cw = rasterize_polygon(verts, 1, 8, 8)
    ccw = rasterize_polygon(verts[::-1], 1, 8, 8)
    assert _pixel_set(cw) == _pixel_set(ccw)


def test_polygon_on_edge_counts_inside():
    # edge passes exactly through pixel centers at x = 1.5
    d = rasterize_polygon([(1.5, 0.5), (3.5, 0.5), (3.5, 2.5), (1.5, 2.5)], 1, 8, 8)
    assert (1, 0) in _pixel_set(d)  # center (1.5, 0.5) lies on the left edge


def test_polygon_needs_three_vertices():
    with pytest.raises(DegeneratePolygon):
        rasterize_polygon([(0, 0), (1, 1)], 1, 8, 8)


def test_polygon_matches_oracle_on_random(rng):
    for _ in range(10):
        n = int(rng.integers(3, 7))
        verts = [(float(rng.uniform(-2, 14)), float(rng.uniform(-2, 14))) for _ in range(n)]
        got = _pixel_set(rasterize_polygon(verts, 1, 12, 12))
        assert got == oracles.polygon_oracle(verts, 12, 12)


# -------------------------------------------------------------- apply_delta

def _delta(pixels, class_id, source):
    return LabelDelta(pixels=np.array(pixels, dtype=np.int64), class_id=class_id, source=source)


def test_eraser_clears_labels():
    lm = LabelMap(width=4, height=4)
    lm = apply_delta(lm, _delta([(1, 1), (2, 2)], 1, "brush"))
    lm = apply_delta(lm, _delta([(1, 1), (2, 2)], 0, "eraser"))
    assert lm.labelled_count() == 0


def test_brush_overwrites_prior_labels():
    lm = LabelMap(width=4, height=4)
    lm = apply_delta(lm, _delta([(1, 1)], 1, "brush"))
    lm = apply_delta(lm, _delta([(1, 1)], 2, "brush"))
    assert lm.classes[1, 1] == 2


def test_smart_mask_fills_only_unlabeled():
    lm = LabelMap(width=4, height=1)
    lm = apply_delta(lm, _delta([(0, 0), (1, 0)], 1, "brush"))
    lm = apply_delta(lm, _delta([(0, 0), (1, 0), (2, 0), (3, 0)], 3, "smart_mask"))
    assert lm.classes[0].tolist() == [1, 1, 3, 3]


def test_apply_never_touches_other_pixels(rng):
    classes = rng.integers(0, 4, (8, 8), dtype=np.uint8)
    lm = LabelMap(width=8, height=8, classes=classes.copy())
    delta = _delta([(2, 3), (4, 5)], 2, "polygon")
    out = apply_delta(lm, delta)
    touched = {(2, 3), (4, 5)}
    for y in range(8):
        for x in range(8):
            if (x, y) not in touched:
                assert out.classes[y, x] == classes[y, x]
    # input map unchanged (pure)
    np.testing.assert_array_equal(lm.classes, classes)


def test_apply_out_of_bounds_rejected():
    lm = LabelMap(width=4, height=4)
    with pytest.raises(OutOfBounds):
        apply_delta(lm, _delta([(4, 0)], 1, "brush"))


def test_delta_source_and_class_rules():
    d = _delta([(0, 0)], 5, "eraser")
    assert d.class_id == 0  # eraser forces 0
    with pytest.raises(ValueError):
        _delta([(0, 0)], 0, "brush")
    with pytest.raises(ValueError):
        _delta([(0, 0)], 1, "scribble")
    with pytest.raises(ValueError):
        _delta([(0, 0)], 300, "brush")


def test_delta_pixels_deduplicated():
    d = _delta([(1, 1), (1, 1), (0, 1)], 1, "brush")
    assert d.n_pixels == 2


def test_replay_matches_per_pixel_simulator(rng):
    """Full-map application equals a one-pixel-at-a-time simulation."""
    w = h = 10
    deltas = []
    for _ in range(30):
        source = ("brush", "polygon", "smart_mask", "eraser")[int(rng.integers(4))]
        cid = 0 if source == "eraser" else int(rng.integers(1, 4))
        n = int(rng.integers(1, 8))
        px = rng.integers(0, w, (n, 2))
        deltas.append(_delta([tuple(p) for p in px], cid, source))

    lm = LabelMap(width=w, height=h)
    for d in deltas:
        lm = apply_delta(lm, d)

    sim = np.zeros((h, w), dtype=np.uint8)
    for d in deltas:
        for x, y in d.pixels:
            if d.source == "eraser":
                sim[y, x] = 0
            elif d.source == "smart_mask":
                if sim[y, x] == 0:
                    sim[y, x] = d.class_id
            else:
                sim[y, x] = d.class_id
    np.testing.assert_array_equal(lm.classes, sim)


# ------------------------------------------------------------- training set

def _tiny_stack(width, height, seed=0):
    rng = np.random.default_rng(seed)
    img = GrayImage.from_array(rng.random((height, width)))
    cfg = FeatureConfig(
        enable_gaussian=False, enable_sobel=False, enable_hessian=False,
        enable_dog=False,
    )
    return build_feature_stack(img, cfg)


def test_extract_no_labels_errors():
    stack = _tiny_stack(6, 6)
    with pytest.raises(NoLabels):
        extract_training_set(stack, [LabelMap(width=6, height=6)])


def test_extract_exact_rows():
    stack = _tiny_stack(6, 6)
    lm = LabelMap(width=6, height=6)
    lm.classes[1, 2] = 1
    lm.classes[3, 4] = 2
    lm.classes[5, 0] = 1
    ts = extract_training_set(stack, [lm])
    assert ts.n_samples == 3
    # class-ascending, row-major within class
    assert ts.classes.tolist() == [1, 1, 2]
    np.testing.assert_array_equal(ts.features[0], stack.data[1, 2])
    np.testing.assert_array_equal(ts.features[1], stack.data[5, 0])
    np.testing.assert_array_equal(ts.features[2], stack.data[3, 4])
    assert ts.feature_names == stack.names


def test_extract_caps_per_class():
    stack = _tiny_stack(300, 200)
    lm = LabelMap(width=300, height=200)
    lm.classes[:, :] = 1  # 60000 pixels of one class
    ts = extract_training_set(stack, [lm])
    assert ts.n_samples == CLASS_SAMPLE_CAP
    assert np.all(ts.classes == 1)
    # deterministic across runs
    ts2 = extract_training_set(stack, [lm])
    np.testing.assert_array_equal(ts.features, ts2.features)


def test_extract_cap_keeps_stable_order():
    stack = _tiny_stack(20, 10)
    lm = LabelMap(width=20, height=10)
    lm.classes[:, :] = 2
    ts = extract_training_set(stack, [lm], cap=50)
    assert ts.n_samples == 50
    # survivors keep original row-major order: feature rows appear in scan order
    flat = stack.data.reshape(-1, stack.n_features)
    pos = [int(np.where((flat == row).all(axis=1))[0][0]) for row in ts.features]
    assert pos == sorted(pos)


def test_extract_pools_across_slices():
    s0 = _tiny_stack(5, 5, seed=1)
    s1 = _tiny_stack(5, 5, seed=2)
    m0 = LabelMap(width=5, height=5, slice_index=0)
    m0.classes[0, 0] = 1
    m1 = LabelMap(width=5, height=5, slice_index=1)
    m1.classes[4, 4] = 2
    ts = extract_training_set([s0, s1], [m0, m1])
    assert ts.n_samples == 2
    np.testing.assert_array_equal(ts.features[0], s0.data[0, 0])
    np.testing.assert_array_equal(ts.features[1], s1.data[4, 4])


def test_extract_dimension_mismatch():
    stack = _tiny_stack(6, 6)
    with pytest.raises(DimensionMismatch):
        extract_training_set(stack, [LabelMap(width=5, height=6)])
