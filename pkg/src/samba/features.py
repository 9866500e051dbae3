"""Per-pixel feature stack: the Weka-style filter bank.

Filters operate on normalized grayscale rasters and use one shared border
convention (mirror padding, kernels truncated at radius ceil(3*sigma) and
renormalized to sum 1). The stack layout is a deterministic function of the
configuration: raw intensity, then Gaussians, Sobel magnitudes, Hessian
eigenvalue pairs, consecutive-scale differences of Gaussians, optional local
window statistics and optional membrane projections.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _filter_kernels as fk
from .accel import pick
from .errors import InvalidConfig, NonPositiveSigma
from .image_io import GrayImage

_correlate_rows = pick(fk.correlate_rows_jit, fk.correlate_rows_numpy)
_correlate_cols = pick(fk.correlate_cols_jit, fk.correlate_cols_numpy)
_sobel_mag = pick(fk.sobel_mag_jit, fk.sobel_mag_numpy)
_hessian_eigen = pick(fk.hessian_eigen_jit, fk.hessian_eigen_numpy)
_window_stat = pick(fk.window_stat_jit, fk.window_stat_numpy)
_dense_correlate = pick(fk.dense_correlate_jit, fk.dense_correlate_numpy)

WINDOW_STAT_NAMES = ("mean", "min", "max", "median", "variance")
_STAT_CODES = {name: i for i, name in enumerate(WINDOW_STAT_NAMES)}

MEMBRANE_PROJECTIONS = ("sum", "mean", "std", "median", "max", "min")
MEMBRANE_ANGLES = (0.0, 30.0, 60.0, 90.0, 120.0, 150.0)

DEFAULT_SIGMAS = (1.0, 2.0, 4.0, 8.0, 16.0)
DEFAULT_WINDOW_RADII = (2, 4)


@dataclass
class FeatureConfig:
    """Filter-bank configuration; serializes to a flat key=value text file."""

    sigmas: tuple = DEFAULT_SIGMAS
    enable_gaussian: bool = True
    enable_sobel: bool = True
    enable_hessian: bool = True
    enable_dog: bool = True
    enable_window_stats: bool = False
    enable_membrane: bool = False
    window_radii: tuple = DEFAULT_WINDOW_RADII
    membrane_size: int = 19
    membrane_width: int = 1

    def __post_init__(self):
        self.sigmas = tuple(float(s) for s in self.sigmas)
        self.window_radii = tuple(int(r) for r in self.window_radii)
        self.validate()

    def validate(self):
        if not self.sigmas:
            raise InvalidConfig("sigmas must be non-empty")
        if any(s <= 0 for s in self.sigmas):
            raise InvalidConfig("sigmas must be positive")
        if any(b >= a for a, b in zip(self.sigmas[1:], self.sigmas)):
            raise InvalidConfig("sigmas must be strictly increasing")
        if not self.window_radii:
            raise InvalidConfig("window_radii must be non-empty")
        if any(r < 1 for r in self.window_radii):
            raise InvalidConfig("window_radii must be >= 1")
        if any(b >= a for a, b in zip(self.window_radii[1:], self.window_radii)):
            raise InvalidConfig("window_radii must be strictly increasing")
        if self.membrane_size < 3 or self.membrane_size % 2 == 0:
            raise InvalidConfig("membrane_size must be odd and >= 3")
        if not 1 <= self.membrane_width <= self.membrane_size:
            raise InvalidConfig("membrane_width must be in [1, membrane_size]")

    def to_text(self) -> str:
        lines = [
            "sigmas = " + ", ".join(_fmt(s) for s in self.sigmas),
            f"enable_gaussian = {_fmt_bool(self.enable_gaussian)}",
            f"enable_sobel = {_fmt_bool(self.enable_sobel)}",
            f"enable_hessian = {_fmt_bool(self.enable_hessian)}",
            f"enable_dog = {_fmt_bool(self.enable_dog)}",
            f"enable_window_stats = {_fmt_bool(self.enable_window_stats)}",
            f"enable_membrane = {_fmt_bool(self.enable_membrane)}",
            "window_radii = " + ", ".join(str(r) for r in self.window_radii),
            f"membrane_size = {self.membrane_size}",
            f"membrane_width = {self.membrane_width}",
        ]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FeatureConfig":
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidConfig(f"line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            try:
                if key == "sigmas":
                    kwargs[key] = tuple(float(v) for v in value.split(","))
                elif key == "window_radii":
                    kwargs[key] = tuple(int(v) for v in value.split(","))
                elif key in ("membrane_size", "membrane_width"):
                    kwargs[key] = int(value)
                elif key.startswith("enable_") and key in cls.__dataclass_fields__:
                    kwargs[key] = _parse_bool(value, key)
                else:
                    raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
            except ValueError as e:
                raise InvalidConfig(f"line {lineno}: {e}") from None
        return cls(**kwargs)


def _fmt(x: float) -> str:
    return "%g" % x


def _fmt_bool(b: bool) -> str:
    return "true" if b else "false"


def _parse_bool(value: str, key: str) -> bool:
    v = value.lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise InvalidConfig(f"bad boolean {value!r} for {key}")


@dataclass
class FeatureStack:
    """Per-pixel feature vectors, (height, width, F) float64."""

    width: int
    height: int
    names: list
    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.shape != (self.height, self.width, len(self.names)):
            raise ValueError("feature data shape inconsistent with names/dimensions")
        if not np.isfinite(self.data).all():
            raise ValueError("non-finite feature values")

    @property
    def n_features(self) -> int:
        return len(self.names)


def gaussian_taps(sigma: float) -> np.ndarray:
    """1-D Gaussian kernel truncated at ceil(3*sigma), renormalized to sum 1."""
    r = math.ceil(3.0 * sigma)
    xs = np.arange(-r, r + 1, dtype=np.float64)
    t = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return t / t.sum()


def _pad(data: np.ndarray, ry: int, rx: int) -> np.ndarray:
    return np.pad(data, ((ry, ry), (rx, rx)), mode="reflect")


def gaussian_blur(img: GrayImage, sigma: float) -> GrayImage:
    """Separable Gaussian convolution with mirror padding."""
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma must be > 0, got {sigma}")
    taps = gaussian_taps(sigma)
    r = taps.shape[0] // 2
    rows = _correlate_rows(np.ascontiguousarray(_pad(img.data, 0, r)), taps)
    out = _correlate_cols(np.ascontiguousarray(_pad(rows, r, 0)), taps)
    return GrayImage(width=img.width, height=img.height, data=out)


def sobel_magnitude(img: GrayImage, sigma: float) -> GrayImage:
    """Gradient magnitude with the 3x3 Sobel pair; sigma=0 skips pre-smoothing."""
    if sigma < 0:
        raise NonPositiveSigma(f"sigma must be >= 0, got {sigma}")
    base = gaussian_blur(img, sigma).data if sigma > 0 else img.data
    out = _sobel_mag(np.ascontiguousarray(_pad(base, 1, 1)))
    return GrayImage(width=img.width, height=img.height, data=out)


def hessian_eigenvalues(img: GrayImage, sigma: float):
    """Per-pixel (lambda_max, lambda_min) of the smoothed Hessian."""
    if sigma <= 0:
        raise NonPositiveSigma(f"sigma must be > 0, got {sigma}")
    smoothed = gaussian_blur(img, sigma).data
    lmax, lmin = _hessian_eigen(np.ascontiguousarray(_pad(smoothed, 1, 1)))
    return (
        GrayImage(width=img.width, height=img.height, data=lmax),
        GrayImage(width=img.width, height=img.height, data=lmin),
    )


def difference_of_gaussians(img: GrayImage, sigma_a: float, sigma_b: float) -> GrayImage:
    """gaussian_blur(sigma_b) - gaussian_blur(sigma_a), elementwise."""
    if sigma_a <= 0 or sigma_b <= 0:
        raise NonPositiveSigma("both sigmas must be > 0")
    out = gaussian_blur(img, sigma_b).data - gaussian_blur(img, sigma_a).data
    return GrayImage(width=img.width, height=img.height, data=out)


def window_statistic(img: GrayImage, radius: int, stat: str) -> GrayImage:
    """Local statistic over the (2r+1)^2 square neighborhood."""
    if radius < 1:
        raise InvalidConfig(f"radius must be >= 1, got {radius}")
    code = _STAT_CODES.get(stat)
    if code is None:
        raise InvalidConfig(f"unknown statistic {stat!r}")
    out = _window_stat(np.ascontiguousarray(_pad(img.data, radius, radius)), radius, code)
    return GrayImage(width=img.width, height=img.height, data=out)


def _rotate_kernel_bilinear(base: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rotate a square kernel about its center, bilinear, zeros outside."""
    size = base.shape[0]
    c = (size - 1) / 2.0
    th = math.radians(angle_deg)
    cos_t, sin_t = math.cos(th), math.sin(th)
    out = np.zeros_like(base)
    for i in range(size):
        for j in range(size):
            dx, dy = j - c, i - c
            sx = cos_t * dx + sin_t * dy + c
            sy = -sin_t * dx + cos_t * dy + c
            x0, y0 = math.floor(sx), math.floor(sy)
            fx, fy = sx - x0, sy - y0
            acc = 0.0
            for (yy, xx, wgt) in (
                (y0, x0, (1 - fx) * (1 - fy)),
                (y0, x0 + 1, fx * (1 - fy)),
                (y0 + 1, x0, (1 - fx) * fy),
                (y0 + 1, x0 + 1, fx * fy),
            ):
                if 0 <= yy < size and 0 <= xx < size and wgt != 0.0:
                    acc += wgt * base[yy, xx]
            out[i, j] = acc
    return out


def membrane_kernels(size: int, width: int) -> list:
    """Line kernels at 30-degree steps, each renormalized to sum 1."""
    base = np.zeros((size, size), dtype=np.float64)
    c0 = (size - width) // 2
    base[:, c0:c0 + width] = 1.0
    kernels = []
    for angle in MEMBRANE_ANGLES:
        k = _rotate_kernel_bilinear(base, angle)
        kernels.append(k / k.sum())
    return kernels


def membrane_projections(img: GrayImage, cfg: FeatureConfig) -> list:
    """Six z-projections (sum, mean, std, median, max, min) over the six
    oriented line-kernel responses."""
    kernels = membrane_kernels(cfg.membrane_size, cfg.membrane_width)
    r = cfg.membrane_size // 2
    padded = np.ascontiguousarray(_pad(img.data, r, r))
    responses = np.stack([_dense_correlate(padded, k) for k in kernels], axis=0)
    projections = [
        responses.sum(axis=0),
        responses.mean(axis=0),
        responses.std(axis=0),
        np.median(responses, axis=0),
        responses.max(axis=0),
        responses.min(axis=0),
    ]
    return [GrayImage(width=img.width, height=img.height, data=p) for p in projections]


def feature_names(cfg: FeatureConfig) -> list:
    """Stack feature names, in stack order (deterministic for a config)."""
    names = ["raw"]
    if cfg.enable_gaussian:
        names += [f"gaussian_s{_fmt(s)}" for s in cfg.sigmas]
    if cfg.enable_sobel:
        names += [f"sobel_s{_fmt(s)}" for s in cfg.sigmas]
    if cfg.enable_hessian:
        for s in cfg.sigmas:
            names += [f"hessian_max_s{_fmt(s)}", f"hessian_min_s{_fmt(s)}"]
    if cfg.enable_dog:
        names += [
            f"dog_s{_fmt(a)}_{_fmt(b)}" for a, b in zip(cfg.sigmas, cfg.sigmas[1:])
        ]
    if cfg.enable_window_stats:
        for stat in WINDOW_STAT_NAMES:
            names += [f"{stat}_r{r}" for r in cfg.window_radii]
    if cfg.enable_membrane:
        names += [
            f"membrane_{p}_k{cfg.membrane_size}w{cfg.membrane_width}"
            for p in MEMBRANE_PROJECTIONS
        ]
    return names


def build_feature_stack(img: GrayImage, cfg: FeatureConfig) -> FeatureStack:
    """Run the configured filter bank; feature order matches feature_names()."""
    cfg.validate()
    planes = [img.data]
    blurs = {}

    def blur(s):
        if s not in blurs:
            blurs[s] = gaussian_blur(img, s)
        return blurs[s]

    if cfg.enable_gaussian:
        planes += [blur(s).data for s in cfg.sigmas]
    if cfg.enable_sobel:
        for s in cfg.sigmas:
            base = blur(s).data
            planes.append(_sobel_mag(np.ascontiguousarray(_pad(base, 1, 1))))
    if cfg.enable_hessian:
        for s in cfg.sigmas:
            lmax, lmin = _hessian_eigen(np.ascontiguousarray(_pad(blur(s).data, 1, 1)))
            planes += [lmax, lmin]
    if cfg.enable_dog:
        for a, b in zip(cfg.sigmas, cfg.sigmas[1:]):
            planes.append(blur(b).data - blur(a).data)
    if cfg.enable_window_stats:
        for stat in WINDOW_STAT_NAMES:
            for r in cfg.window_radii:
                planes.append(window_statistic(img, r, stat).data)
    if cfg.enable_membrane:
        planes += [g.data for g in membrane_projections(img, cfg)]

    data = np.stack(planes, axis=-1)
    return FeatureStack(width=img.width, height=img.height, names=feature_names(cfg), data=data)
