"""Single-channel raster loading, normalization, resampling, and integral images.

Values are carried as float32 arrays in row-major (H, W) layout. All
operations are pure: they return new Raster instances and never mutate
their inputs, so they are safe to call from any number of workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from .errors import ParameterError, RasterIOError

PERCENTILE_LO_DEFAULT = 2.0
PERCENTILE_HI_DEFAULT = 98.0


@dataclass(frozen=True)
class Raster:
    """Immutable single-channel image.

    Attributes:
        values: float32 array of shape (height, width), C-contiguous.
        bit_depth_origin: bit depth of the source file (8 or 16).
        value_range: (lo, hi) the values are known to span. After
            normalize() this is (0.0, 1.0).
    """

    values: np.ndarray
    bit_depth_origin: int = 8
    value_range: tuple[float, float] = field(default=(0.0, 255.0))

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float32)
        if v.ndim != 2:
            raise ParameterError(f"raster values must be 2-D, got ndim={v.ndim}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ParameterError(f"raster dimensions must be >= 1, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def is_normalized(self) -> bool:
        lo, hi = self.value_range
        return lo == 0.0 and hi == 1.0


def load_grayscale(path) -> Raster:
    """Load an image file as a raw (un-normalized) single-channel raster.

    8/16-bit grayscale is read as-is; 8-bit RGB is reduced by unweighted
    channel mean (SAR pseudo-RGB files replicate one channel, so the mean
    is exact there). No normalization is applied.
    """
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise RasterIOError(f"file not found: {path}") from None
    except Exception as exc:
        raise RasterIOError(f"unreadable image file {path}: {exc}") from exc

    if img.width == 0 or img.height == 0:
        raise RasterIOError(f"zero-dimension image: {path}")

    mode = img.mode
    if mode in ("L", "P"):
        arr = np.asarray(img.convert("L"), dtype=np.float32)
        depth = 8
    elif mode in ("I;16", "I;16B", "I;16L"):
        arr = np.asarray(img, dtype=np.float32)
        depth = 16
    elif mode == "I":
        arr = np.asarray(img, dtype=np.int64)
        if arr.min() < 0 or arr.max() > 65535:
            raise RasterIOError(f"unsupported bit depth (32-bit integer range) in {path}")
        arr = arr.astype(np.float32)
        depth = 16
    elif mode in ("RGB", "RGBA"):
        rgb = np.asarray(img.convert("RGB"), dtype=np.float32)
        arr = rgb.mean(axis=2)
        depth = 8
    else:
        raise RasterIOError(f"unsupported image mode {mode!r} in {path}")

    hi = float(2**depth - 1)
    return Raster(arr, bit_depth_origin=depth, value_range=(0.0, hi))


def save_grayscale(r: Raster, path) -> None:
    """Write raw raster values as an 8- or 16-bit grayscale PNG.

    Values are rounded and clipped to the origin bit depth's range; the
    bytes produced are deterministic for identical inputs.
    """
    import io

    from .fileio import atomic_write_bytes

    if r.bit_depth_origin == 16:
        arr = np.clip(np.rint(r.values), 0, 65535).astype(np.uint16)
    else:
        arr = np.clip(np.rint(r.values), 0, 255).astype(np.uint8)
    img = Image.fromarray(arr)

    buf = io.BytesIO()
    img.save(buf, format="PNG")
    atomic_write_bytes(path, buf.getvalue())


def normalize(r: Raster, policy: str = "minmax",
              pl: float = PERCENTILE_LO_DEFAULT,
              ph: float = PERCENTILE_HI_DEFAULT) -> Raster:
    """Map raster values into [0, 1].

    minmax maps [min, max] -> [0, 1]. percentile first clips to the
    [pl-th, ph-th] percentiles, then applies the same map. A constant image
    maps to all zeros by convention so descriptor pipelines stay total.
    """
    v = r.values
    if policy == "minmax":
        lo = float(v.min())
        hi = float(v.max())
    elif policy == "percentile":
        if not (0.0 <= pl < ph <= 100.0):
            raise ParameterError(f"percentile bounds must satisfy 0 <= pl < ph <= 100, got ({pl}, {ph})")
        lo = float(np.percentile(v, pl))
        hi = float(np.percentile(v, ph))
    else:
        raise ParameterError(f"unknown normalization policy {policy!r}")

    if hi <= lo:
        out = np.zeros_like(v)
    else:
        out = np.clip((v - np.float32(lo)) / np.float32(hi - lo), 0.0, 1.0)
    return Raster(out, bit_depth_origin=r.bit_depth_origin, value_range=(0.0, 1.0))


def _source_coords(n_dst: int, n_src: int) -> np.ndarray:
    # Half-pixel-center convention: dst pixel i samples src at (i+0.5)*scale-0.5.
    scale = n_src / n_dst
    return (np.arange(n_dst, dtype=np.float64) + 0.5) * scale - 0.5


def resample(r: Raster, new_w: int, new_h: int, method: str = "bilinear") -> Raster:
    """Resample to (new_w, new_h) with nearest or bilinear interpolation.

    Identity when the target equals the source size; bilinear reproduces a
    constant image exactly.
    """
    if new_w < 1 or new_h < 1:
        raise ParameterError(f"target dimensions must be >= 1, got ({new_w}, {new_h})")
    if method not in ("nearest", "bilinear"):
        raise ParameterError(f"unknown resample method {method!r}")

    if new_w == r.width and new_h == r.height:
        return Raster(r.values.copy(), r.bit_depth_origin, r.value_range)

    out = resample_values(r.values, new_w, new_h, method)
    return Raster(out, bit_depth_origin=r.bit_depth_origin, value_range=r.value_range)


def resample_values(values: np.ndarray, new_w: int, new_h: int,
                    method: str = "bilinear") -> np.ndarray:
    """Array-level resample shared by Raster and feature-stack code paths."""
    src = np.asarray(values, dtype=np.float32)
    h, w = src.shape
    if new_w == w and new_h == h:
        return src.copy()

    xs = _source_coords(new_w, w)
    ys = _source_coords(new_h, h)

    if method == "nearest":
        xi = np.clip(np.round(xs), 0, w - 1).astype(np.intp)
        yi = np.clip(np.round(ys), 0, h - 1).astype(np.intp)
        return src[np.ix_(yi, xi)].astype(np.float32)

    x0 = np.clip(np.floor(xs), 0, w - 1).astype(np.intp)
    y0 = np.clip(np.floor(ys), 0, h - 1).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(xs - x0, 0.0, 1.0)[None, :]
    fy = np.clip(ys - y0, 0.0, 1.0)[:, None]

    src64 = src.astype(np.float64)
    top = src64[np.ix_(y0, x0)] * (1.0 - fx) + src64[np.ix_(y0, x1)] * fx
    bot = src64[np.ix_(y1, x0)] * (1.0 - fx) + src64[np.ix_(y1, x1)] * fx
    return (top * (1.0 - fy) + bot * fy).astype(np.float32)


class IntegralImage:
    """(H+1) x (W+1) cumulative-sum table for O(1) rectangle sums.

    Sums are accumulated in float64, so 8/16-bit integer-valued inputs
    give exact rectangle sums at any raster size that fits in memory.
    """

    def __init__(self, values: np.ndarray):
        v = np.asarray(values, dtype=np.float64)
        if v.ndim != 2:
            raise ParameterError("integral image needs a 2-D array")
        self.height, self.width = v.shape
        table = np.zeros((self.height + 1, self.width + 1), dtype=np.float64)
        np.cumsum(np.cumsum(v, axis=0), axis=1, out=table[1:, 1:])
        self.table = table

    def rect_sum(self, x: int, y: int, w: int, h: int) -> float:
        """Sum of values over the half-open window [x, x+w) x [y, y+h)."""
        t = self.table
        return float(t[y + h, x + w] - t[y, x + w] - t[y + h, x] + t[y, x])

    def rect_sums(self, x0: np.ndarray, y0: np.ndarray, w: int, h: int) -> np.ndarray:
        """Vectorized rect_sum over arrays of top-left corners."""
        t = self.table
        return t[y0 + h, x0 + w] - t[y0, x0 + w] - t[y0 + h, x0] + t[y0, x0]
