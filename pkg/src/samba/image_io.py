"""Decode, normalize and encode images.

Everything downstream works on one canonical representation: row-major float64
intensities in [0, 1]. PNG/JPEG/TIFF (including multi-page TIFF stacks) are
decoded through Pillow; 8-bit samples are divided by 255, 16-bit by 65535 and
float samples min-max rescaled per slice. Alpha channels are dropped, palette
images expand to RGB.
"""

import io
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, ImageSequence, UnidentifiedImageError

from .errors import (
    InconsistentStack,
    MalformedFile,
    UnsupportedChannelCount,
    UnsupportedDepth,
)

SUPPORTED_FORMATS = {"PNG", "JPEG", "TIFF"}

# Rec. 709 luma weights for RGB -> gray.
LUMA_R, LUMA_G, LUMA_B = 0.2126, 0.7152, 0.0722


@dataclass
class GrayImage:
    """Single-channel 2-D raster.

    `data` is (height, width) float64. Decoded images carry intensities in
    [0, 1]; filter-response maps reuse this container and are only required
    to be finite.
    """

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != (self.height, self.width):
            raise ValueError(f"data shape {self.data.shape} != (H,W)=({self.height},{self.width})")
        if self.width < 1 or self.height < 1:
            raise ValueError("empty image")
        if not np.isfinite(self.data).all():
            raise ValueError("non-finite values in image data")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "GrayImage":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)


@dataclass
class RasterImage:
    """Normalized intensity raster, 1 or 3 channels, values in [0, 1]."""

    width: int
    height: int
    channels: int
    data: np.ndarray  # (height, width, channels) float64

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.channels not in (1, 3):
            raise UnsupportedChannelCount(f"channels must be 1 or 3, got {self.channels}")
        if self.data.shape != (self.height, self.width, self.channels):
            raise ValueError(f"data shape {self.data.shape} inconsistent with header")
        if self.width < 1 or self.height < 1:
            raise ValueError("empty image")
        if not np.isfinite(self.data).all():
            raise ValueError("non-finite intensity")
        if self.data.min() < 0.0 or self.data.max() > 1.0:
            raise ValueError("intensity outside [0,1]")


@dataclass
class ImageStack:
    """Ordered slices sharing identical dimensions and channel count."""

    slices: list[RasterImage] = field(default_factory=list)

    def __post_init__(self):
        if not self.slices:
            raise ValueError("stack needs at least one slice")
        w, h, c = self.slices[0].width, self.slices[0].height, self.slices[0].channels
        for s in self.slices[1:]:
            if (s.width, s.height, s.channels) != (w, h, c):
                raise InconsistentStack("slices differ in dimensions or channels")

    @property
    def width(self) -> int:
        return self.slices[0].width

    @property
    def height(self) -> int:
        return self.slices[0].height

    @property
    def channels(self) -> int:
        return self.slices[0].channels

    @property
    def n_slices(self) -> int:
        return len(self.slices)


def _normalize_frame(img: Image.Image) -> np.ndarray:
    """One Pillow frame -> (h, w, c) float64 in [0,1]. Raises UnsupportedDepth."""
    mode = img.mode
    if mode == "1":
        raise UnsupportedDepth("1-bit samples are not supported")
    if mode in ("LA",):
        img = img.convert("L")
        mode = "L"
    elif mode == "P":
        img = img.convert("RGB")
        mode = "RGB"
    elif mode in ("RGBA", "RGBX", "CMYK", "YCbCr"):
        img = img.convert("RGB")
        mode = "RGB"

    if mode == "L":
        arr = np.asarray(img, dtype=np.float64) / 255.0
        return arr[:, :, None]
    if mode == "RGB":
        arr = np.asarray(img, dtype=np.float64) / 255.0
        return arr
    if mode in ("I;16", "I;16L", "I;16B", "I;16N"):
        arr = np.asarray(img, dtype=np.float64) / 65535.0
        return arr[:, :, None]
    if mode == "I":
        # Some TIFF/PNG 16-bit files surface as 32-bit int; accept if they fit.
        arr = np.asarray(img, dtype=np.float64)
        if arr.min() < 0 or arr.max() > 65535:
            raise UnsupportedDepth("integer samples wider than 16 bits")
        return (arr / 65535.0)[:, :, None]
    if mode == "F":
        arr = np.asarray(img, dtype=np.float64)
        if not np.isfinite(arr).all():
            raise MalformedFile("non-finite float samples")
        lo, hi = arr.min(), arr.max()
        if hi > lo:
            arr = (arr - lo) / (hi - lo)
        else:
            arr = np.zeros_like(arr)
        return arr[:, :, None]
    raise UnsupportedDepth(f"unsupported sample format (mode {mode})")


def decode_image(data: bytes, hint: str | None = None) -> ImageStack:
    """Decode PNG/JPEG/TIFF bytes into a normalized stack, one slice per page.

    `hint` is an advisory format tag ("png"/"jpeg"/"tiff" or a MIME type);
    the container is sniffed from the bytes regardless.
    """
    try:
        img = Image.open(io.BytesIO(data))
        fmt = img.format
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise MalformedFile(f"undecodable image bytes: {e}") from None
    if fmt == "MPO":  # multi-picture JPEG container; treat as JPEG
        fmt = "JPEG"
    if fmt not in SUPPORTED_FORMATS:
        raise MalformedFile(f"unsupported container format {fmt!r}")

    slices: list[RasterImage] = []
    try:
        for frame in ImageSequence.Iterator(img):
            arr = _normalize_frame(frame)
            h, w, c = arr.shape
            slices.append(RasterImage(width=w, height=h, channels=c, data=np.clip(arr, 0.0, 1.0)))
    except (UnsupportedDepth, MalformedFile):
        raise
    except (OSError, ValueError, SyntaxError) as e:
        raise MalformedFile(f"failed while decoding pages: {e}") from None
    return ImageStack(slices=slices)


def to_grayscale(img: RasterImage) -> GrayImage:
    """Collapse to one channel: identity for gray, Rec. 709 luma for RGB."""
    if img.channels == 1:
        data = img.data[:, :, 0]
    elif img.channels == 3:
        data = (
            LUMA_R * img.data[:, :, 0]
            + LUMA_G * img.data[:, :, 1]
            + LUMA_B * img.data[:, :, 2]
        )
    else:  # pragma: no cover - RasterImage already rejects this
        raise UnsupportedChannelCount(f"cannot grayscale {img.channels} channels")
    return GrayImage(width=img.width, height=img.height, data=np.clip(data, 0.0, 1.0))


def _encode_gray8(arr: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(arr, dtype=np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def intensity_to_u8(data: np.ndarray) -> np.ndarray:
    """Scale [0,1] intensities by 255 and round half-up."""
    return np.floor(np.asarray(data, dtype=np.float64) * 255.0 + 0.5).astype(np.uint8)


def encode_png(raster) -> bytes:
    """Lossless 8-bit PNG.

    Class-id rasters (LabelMap or uint8 arrays) are written verbatim;
    GrayImage intensities are scaled by 255 and rounded half-up.
    """
    if isinstance(raster, GrayImage):
        return _encode_gray8(intensity_to_u8(raster.data))
    classes = getattr(raster, "classes", None)
    if classes is not None:  # LabelMap without importing the labelling module
        return _encode_gray8(classes)
    arr = np.asarray(raster)
    if arr.dtype == np.uint8 and arr.ndim == 2:
        return _encode_gray8(arr)
    raise TypeError("encode_png expects a LabelMap, a GrayImage or a 2-D uint8 array")


def decode_class_png(data: bytes) -> np.ndarray:
    """Read an 8-bit class-id PNG back verbatim (inverse of encode_png)."""
    try:
        img = Image.open(io.BytesIO(data))
    except (UnidentifiedImageError, OSError) as e:
        raise MalformedFile(f"undecodable label PNG: {e}") from None
    if img.format != "PNG" or img.mode not in ("L", "P"):
        raise MalformedFile("labels must be an 8-bit single-channel PNG")
    if img.mode == "P":
        img = img.convert("L")
    return np.asarray(img, dtype=np.uint8)


def encode_png_rgb(data: np.ndarray) -> bytes:
    """8-bit RGB PNG from (h, w, 3) intensities in [0,1] (display plumbing)."""
    buf = io.BytesIO()
    Image.fromarray(intensity_to_u8(data), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
