"""Promptable smart-label mask proposals.

A prompt point yields exactly three connected masks at increasing length
scales plus a quality score each. Two backends implement the contract: a
neural one that runs exported encoder/decoder model files through
onnxruntime (paths from SAMBA_ENCODER_PATH / SAMBA_DECODER_PATH), and a
deterministic region-growing mock used whenever no model files are
configured. The two are indistinguishable on the wire apart from mask
content and backend_id.
"""

import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import BackendUnavailable, InferenceFailure, OutOfBounds
from .image_io import GrayImage, RasterImage, to_grayscale
from .labels import LabelDelta

ENCODER_ENV = "SAMBA_ENCODER_PATH"
DECODER_ENV = "SAMBA_DECODER_PATH"

# Flood-fill tolerances backing the mock's three length scales (fractions of
# the [0,1] intensity range; arbitrary but fixed).
MOCK_TOLERANCES = (0.05, 0.12, 0.25)

_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int8)


@dataclass
class PromptPoint:
    x: int
    y: int
    slice_index: int = 0


@dataclass
class MaskProposal:
    mask: np.ndarray  # (h, w) bool
    quality: float
    scale_rank: int

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if not self.mask.any():
            raise ValueError("mask proposals must be non-empty")

    @property
    def area(self) -> int:
        return int(self.mask.sum())


@dataclass
class MaskTriple:
    proposals: list

    def __post_init__(self):
        if len(self.proposals) != 3:
            raise ValueError("exactly three proposals required")
        if [p.scale_rank for p in self.proposals] != [0, 1, 2]:
            raise ValueError("scale ranks must be 0,1,2 in order")
        areas = [p.area for p in self.proposals]
        if not (areas[0] <= areas[1] <= areas[2]):
            raise ValueError("areas must be nondecreasing in scale rank")


@dataclass
class ImageEmbedding:
    tensor: np.ndarray
    backend_id: str
    width: int
    height: int
    scale: float = 1.0  # prompt-coordinate scale into the encoder frame


def _check_bounds(point: PromptPoint, width: int, height: int):
    if not (0 <= point.x < width and 0 <= point.y < height):
        raise OutOfBounds(f"prompt point ({point.x},{point.y}) outside {width}x{height}")


def region_grow(img: GrayImage, point: PromptPoint, tolerance: float) -> np.ndarray:
    """4-connected component of pixels within `tolerance` of the seed value."""
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    _check_bounds(point, img.width, img.height)
    seed_val = img.data[point.y, point.x]
    within = np.abs(img.data - seed_val) <= tolerance
    labels, _ = ndimage.label(within, structure=_FOUR_CONNECTED)
    return labels == labels[point.y, point.x]


def mask_perimeter(mask: np.ndarray) -> int:
    """Count of mask-pixel edges facing a non-mask pixel or the border."""
    m = np.asarray(mask, dtype=bool)
    padded = np.pad(m, 1, mode="constant", constant_values=False)
    per = 0
    for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        shifted = padded[1 + dy:padded.shape[0] - 1 + dy, 1 + dx:padded.shape[1] - 1 + dx]
        per += int((m & ~shifted).sum())
    return per


def mask_quality(mask: np.ndarray) -> float:
    """Compactness heuristic 1/(1 + perimeter/area)."""
    area = int(np.asarray(mask, dtype=bool).sum())
    return 1.0 / (1.0 + mask_perimeter(mask) / area)


def _rank_by_area(candidates) -> MaskTriple:
    """candidates: [(mask, quality)] -> triple ordered by nondecreasing area."""
    order = sorted(range(len(candidates)), key=lambda i: (int(candidates[i][0].sum()), i))
    proposals = [
        MaskProposal(mask=candidates[i][0], quality=float(candidates[i][1]), scale_rank=rank)
        for rank, i in enumerate(order)
    ]
    return MaskTriple(proposals=proposals)


class MockBackend:
    """Deterministic stand-in for the neural decoder: region growing at
    three fixed tolerances."""

    backend_id = "mock"

    def compute_embedding(self, img: RasterImage) -> ImageEmbedding:
        g = to_grayscale(img)
        return ImageEmbedding(tensor=g.data, backend_id=self.backend_id,
                              width=g.width, height=g.height)

    def prompt_masks(self, embedding: ImageEmbedding, point: PromptPoint) -> MaskTriple:
        g = GrayImage.from_array(embedding.tensor)
        candidates = []
        for tol in MOCK_TOLERANCES:
            mask = region_grow(g, point, tol)
            candidates.append((mask, mask_quality(mask)))
        return _rank_by_area(candidates)


class OnnxBackend:
    """Runs exported encoder/decoder model files through onnxruntime.

    The encoder consumes a 1024-long-side RGB tensor normalized with
    ImageNet statistics; the decoder follows the standard exported-decoder
    input signature (image_embeddings, point_coords, point_labels,
    mask_input, has_mask_input, orig_im_size) and emits three mask logits
    plus quality scores.
    """

    backend_id = "onnx"
    ENCODER_SIDE = 1024
    _PIXEL_MEAN = np.array([123.675, 116.28, 103.53], dtype=np.float32)
    _PIXEL_STD = np.array([58.395, 57.12, 57.375], dtype=np.float32)

    def __init__(self, encoder_path: str, decoder_path: str):
        self.encoder_path = encoder_path
        self.decoder_path = decoder_path
        self._encoder = None
        self._decoder = None

    def _session(self, path: str):
        try:
            import onnxruntime as ort
        except ImportError:
            raise BackendUnavailable("onnxruntime is not installed") from None
        if not path or not os.path.isfile(path):
            raise BackendUnavailable(f"model file not found: {path!r}")
        try:
            return ort.InferenceSession(path, providers=["CPUExecutionProvider"])
        except Exception as e:
            raise BackendUnavailable(f"cannot load model {path!r}: {e}") from None

    def _ensure_sessions(self):
        if self._encoder is None:
            self._encoder = self._session(self.encoder_path)
        if self._decoder is None:
            self._decoder = self._session(self.decoder_path)

    def compute_embedding(self, img: RasterImage) -> ImageEmbedding:
        self._ensure_sessions()
        h, w = img.height, img.width
        scale = self.ENCODER_SIDE / max(h, w)
        try:
            from PIL import Image

            rgb = img.data if img.channels == 3 else np.repeat(img.data, 3, axis=2)
            pil = Image.fromarray((rgb * 255.0).astype(np.uint8))
            nh, nw = round(h * scale), round(w * scale)
            resized = np.asarray(pil.resize((nw, nh), Image.BILINEAR), dtype=np.float32)
            tensor = (resized - self._PIXEL_MEAN) / self._PIXEL_STD
            padded = np.zeros((self.ENCODER_SIDE, self.ENCODER_SIDE, 3), dtype=np.float32)
            padded[:nh, :nw] = tensor
            inp = padded.transpose(2, 0, 1)[None]
            name = self._encoder.get_inputs()[0].name
            out = self._encoder.run(None, {name: inp})[0]
        except BackendUnavailable:
            raise
        except Exception as e:
            raise InferenceFailure(f"encoder failed: {e}") from None
        return ImageEmbedding(tensor=out, backend_id=self.backend_id,
                              width=w, height=h, scale=scale)

    def prompt_masks(self, embedding: ImageEmbedding, point: PromptPoint) -> MaskTriple:
        self._ensure_sessions()
        _check_bounds(point, embedding.width, embedding.height)
        try:
            coords = np.array(
                [[[point.x * embedding.scale, point.y * embedding.scale], [0.0, 0.0]]],
                dtype=np.float32,
            )
            labels = np.array([[1.0, -1.0]], dtype=np.float32)
            feeds = {
                "image_embeddings": embedding.tensor.astype(np.float32),
                "point_coords": coords,
                "point_labels": labels,
                "mask_input": np.zeros((1, 1, 256, 256), dtype=np.float32),
                "has_mask_input": np.zeros(1, dtype=np.float32),
                "orig_im_size": np.array([embedding.height, embedding.width], dtype=np.float32),
            }
            masks, scores = self._decoder.run(None, feeds)[:2]
        except Exception as e:
            raise InferenceFailure(f"decoder failed: {e}") from None

        masks = np.asarray(masks)[0]  # (3, h, w) logits
        scores = np.asarray(scores).reshape(-1)
        candidates = []
        for i in range(3):
            binary = masks[i] > 0.0
            binary[point.y, point.x] = True  # contract: mask contains the prompt
            lab, _ = ndimage.label(binary, structure=_FOUR_CONNECTED)
            comp = lab == lab[point.y, point.x]
            candidates.append((comp, float(scores[i]) if i < scores.size else 0.0))
        return _rank_by_area(candidates)


def get_backend(env: dict | None = None):
    """Pick the backend from configuration; mock when no model paths are set."""
    env = os.environ if env is None else env
    enc = env.get(ENCODER_ENV, "").strip()
    dec = env.get(DECODER_ENV, "").strip()
    if not enc and not dec:
        return MockBackend()
    return OnnxBackend(enc, dec)


def compute_embedding(img: RasterImage, backend) -> ImageEmbedding:
    """Run the backend's encoder (slow path; the server does this off-thread)."""
    return backend.compute_embedding(img)


def prompt_masks(embedding: ImageEmbedding, point: PromptPoint, backend) -> MaskTriple:
    """Three scale-ordered connected masks containing the prompt point."""
    _check_bounds(point, embedding.width, embedding.height)
    return backend.prompt_masks(embedding, point)


def select_scale(triple: MaskTriple, scale_index: int) -> MaskProposal:
    """Cycle through the three scales (right-click increments the index)."""
    return triple.proposals[scale_index % 3]


def accept_mask(proposal: MaskProposal, class_id: int) -> LabelDelta:
    """Confirmed mask -> smart_mask delta (fills only unlabeled pixels)."""
    ys, xs = np.nonzero(proposal.mask)
    return LabelDelta(
        pixels=np.column_stack((xs.astype(np.int64), ys.astype(np.int64))),
        class_id=class_id,
        source="smart_mask",
    )
