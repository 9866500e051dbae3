import io

import numpy as np
import pytest
from PIL import Image

from samba.errors import InconsistentStack, MalformedFile, UnsupportedDepth
from samba.image_io import (
    GrayImage,
    RasterImage,
    decode_class_png,
    decode_image,
    encode_png,
    to_grayscale,
)
from samba.labels import LabelMap


def _png(arr, _mode=None):
    buf = io.BytesIO()
    Image.fromarray(arr).save(buf, format="PNG")
    return buf.getvalue()


def _tiff(frames, _mode=None):
    buf = io.BytesIO()
    imgs = [Image.fromarray(f) for f in frames]
    imgs[0].save(buf, format="TIFF", save_all=True, append_images=imgs[1:])
    return buf.getvalue()


def test_full_scale_8bit_pixel_maps_to_one():
    stack = decode_image(_png(np.array([[255]], dtype=np.uint8), "L"))
    assert stack.n_slices == 1
    assert stack.slices[0].data.tolist() == [[[1.0]]]


def test_16bit_tiff_two_pages_endpoints():
    frames = [
        np.zeros((2, 2), dtype=np.uint16),
        np.full((2, 2), 65535, dtype=np.uint16),
    ]
    stack = decode_image(_tiff(frames, "I;16"))
    assert stack.n_slices == 2
    assert np.all(stack.slices[0].data == 0.0)
    assert np.all(stack.slices[1].data == 1.0)


def test_8bit_gradient_matches_reference_decoder():
    cv2 = pytest.importorskip("cv2")
    arr = np.arange(9, dtype=np.uint8).reshape(3, 3)
    data = _png(arr, "L")
    stack = decode_image(data, hint="png")
    ref = cv2.imdecode(np.frombuffer(data, np.uint8), cv2.IMREAD_UNCHANGED)
    assert ref.dtype == np.uint8
    np.testing.assert_allclose(stack.slices[0].data[:, :, 0], ref / 255.0, atol=0)


def test_16bit_png_matches_reference_decoder():
    cv2 = pytest.importorskip("cv2")
    rng = np.random.default_rng(3)
    arr = rng.integers(0, 65536, (7, 5), dtype=np.uint16)
    data = _png(arr, "I;16")
    stack = decode_image(data)
    ref = cv2.imdecode(np.frombuffer(data, np.uint8), cv2.IMREAD_UNCHANGED)
    assert ref.dtype == np.uint16
    np.testing.assert_allclose(stack.slices[0].data[:, :, 0], ref / 65535.0, atol=0)


def test_float_tiff_minmax_and_constant_slice():
    rng = np.random.default_rng(1)
    a = rng.normal(3.0, 2.0, (6, 4)).astype(np.float32)
    const = np.full((6, 4), 7.5, dtype=np.float32)
    stack = decode_image(_tiff([a, const], "F"))
    s0 = stack.slices[0].data[:, :, 0]
    assert s0.min() == 0.0 and s0.max() == 1.0
    # monotone: sort order preserved
    assert np.array_equal(np.argsort(a.reshape(-1)), np.argsort(s0.reshape(-1)))
    assert np.all(stack.slices[1].data == 0.0)


def test_jpeg_decodes_in_range():
    rng = np.random.default_rng(2)
    arr = rng.integers(0, 256, (32, 32), dtype=np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, "L").save(buf, format="JPEG")
    stack = decode_image(buf.getvalue(), hint="image/jpeg")
    d = stack.slices[0].data
    assert d.min() >= 0.0 and d.max() <= 1.0 and np.isfinite(d).all()


def test_rgba_drops_alpha_and_palette_expands():
    rgba = np.zeros((2, 2, 4), dtype=np.uint8)
    rgba[..., 0] = 255
    rgba[..., 3] = 7
    stack = decode_image(_png(rgba, "RGBA"))
    assert stack.channels == 3
    np.testing.assert_array_equal(stack.slices[0].data[..., 0], 1.0)

    pal = Image.fromarray(np.array([[0, 1], [2, 3]], dtype=np.uint8), "P")
    pal.putpalette([0, 0, 0, 255, 0, 0, 0, 255, 0, 0, 0, 255])
    buf = io.BytesIO()
    pal.save(buf, format="PNG")
    stack = decode_image(buf.getvalue())
    assert stack.channels == 3


def test_malformed_bytes_rejected():
    with pytest.raises(MalformedFile):
        decode_image(b"not an image at all")
    with pytest.raises(MalformedFile):
        decode_image(_png(np.zeros((2, 2), np.uint8), "L")[:20])


def test_unsupported_depths_rejected():
    onebit = Image.fromarray(np.array([[True, False]]), "1")
    buf = io.BytesIO()
    onebit.save(buf, format="PNG")
    with pytest.raises(UnsupportedDepth):
        decode_image(buf.getvalue())

    wide = np.array([[0, 1 << 20]], dtype=np.int32)
    with pytest.raises(UnsupportedDepth):
        decode_image(_tiff([wide], "I"))


def test_inconsistent_pages_rejected():
    buf = io.BytesIO()
    a = Image.fromarray(np.zeros((4, 4), np.uint8), "L")
    b = Image.fromarray(np.zeros((5, 4), np.uint8), "L")
    a.save(buf, format="TIFF", save_all=True, append_images=[b])
    with pytest.raises(InconsistentStack):
        decode_image(buf.getvalue())


def test_decode_never_yields_out_of_range(rng):
    for _ in range(5):
        arr = rng.integers(0, 65536, (9, 9), dtype=np.uint16)
        stack = decode_image(_png(arr, "I;16"))
        d = stack.slices[0].data
        assert np.isfinite(d).all() and d.min() >= 0.0 and d.max() <= 1.0


def test_to_grayscale_identity_and_luma():
    g = RasterImage(width=2, height=1, channels=1,
                    data=np.array([[[0.25], [0.75]]]))
    out = to_grayscale(g)
    np.testing.assert_array_equal(out.data, [[0.25, 0.75]])

    white = RasterImage(width=1, height=1, channels=3, data=np.ones((1, 1, 3)))
    assert to_grayscale(white).data[0, 0] == pytest.approx(1.0, abs=1e-12)

    red = np.zeros((1, 1, 3))
    red[0, 0, 0] = 1.0
    r = RasterImage(width=1, height=1, channels=3, data=red)
    assert to_grayscale(r).data[0, 0] == pytest.approx(0.2126, abs=1e-12)


def test_encode_png_label_round_trip(rng):
    classes = rng.integers(0, 5, (13, 11), dtype=np.uint8)
    lm = LabelMap(width=11, height=13, classes=classes)
    decoded = decode_class_png(encode_png(lm))
    np.testing.assert_array_equal(decoded, classes)

    zero = LabelMap(width=4, height=4)
    np.testing.assert_array_equal(decode_class_png(encode_png(zero)), 0)


def test_encode_png_intensity_rounds_half_up():
    g = GrayImage(width=1, height=1, data=np.array([[0.5]]))
    arr = np.asarray(Image.open(io.BytesIO(encode_png(g))))
    assert arr[0, 0] == 128  # 0.5*255 = 127.5 rounds up
