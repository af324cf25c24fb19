"""Canny edge detector: Gaussian smoothing, gradient magnitude,
non-maximum suppression, percentile hysteresis thresholds.

Thresholds are taken from the distribution of nonzero gradient magnitudes
(high = percentile, low = low_frac * high) so the detector adapts to SAR
dynamic range instead of assuming 8-bit absolute levels.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..errors import ParameterError
from ..raster import Raster
from ._pad import pad_reflect
from .params import CannyParams
from .stack import FeatureStack


def _gaussian_kernel(sigma: float) -> np.ndarray:
    # Truncate at 2*sigma; sigma=1.4 gives the default 5-tap kernel.
    radius = max(1, int(2.0 * sigma))
    k = np.exp(-0.5 * (np.arange(-radius, radius + 1, dtype=np.float64) / sigma) ** 2)
    return k / k.sum()


def _smooth(values: np.ndarray, sigma: float) -> np.ndarray:
    k = _gaussian_kernel(sigma)
    radius = len(k) // 2
    padded = pad_reflect(values.astype(np.float64), radius, radius, radius, radius)
    h, w = values.shape
    out = np.zeros((h, w + 2 * radius), dtype=np.float64)
    for i, coeff in enumerate(k):
        out += coeff * padded[i:i + h, :]
    final = np.zeros((h, w), dtype=np.float64)
    for i, coeff in enumerate(k):
        final += coeff * out[:, i:i + w]
    return final


def _nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin ridges to one pixel along the gradient direction.

    Directions are quantized to 4 sectors. Ties on plateaus are broken by
    requiring strict dominance over the forward neighbor only, so a 2-px
    plateau keeps exactly one pixel.
    """
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")
    angle = np.arctan2(gy, gx)
    sector = np.round(angle / (np.pi / 4.0)).astype(np.int64) % 4

    center = padded[1:h + 1, 1:w + 1]
    shifts = {
        # sector 0: gradient ~ horizontal -> compare left/right neighbors
        0: (padded[1:h + 1, 0:w], padded[1:h + 1, 2:w + 2]),
        # sector 1: gradient along +x,+y diagonal
        1: (padded[0:h, 0:w], padded[2:h + 2, 2:w + 2]),
        # sector 2: gradient ~ vertical -> compare up/down
        2: (padded[0:h, 1:w + 1], padded[2:h + 2, 1:w + 1]),
        # sector 3: gradient along -x,+y diagonal
        3: (padded[0:h, 2:w + 2], padded[2:h + 2, 0:w]),
    }
    keep = np.zeros((h, w), dtype=bool)
    for s, (back, fwd) in shifts.items():
        mask = sector == s
        keep |= mask & (center >= back) & (center > fwd)
    keep &= mag > 0
    return keep


def canny(r: Raster, params: CannyParams | None = None) -> FeatureStack:
    """Binary edge map of a normalized raster; edges are 1 and background 0."""
    p = params or CannyParams()
    if not r.is_normalized():
        raise ParameterError("canny expects a normalized raster (values in [0, 1])")

    smoothed = _smooth(r.values, p.sigma)
    gx = ndimage.sobel(smoothed, axis=1, mode="reflect")
    gy = ndimage.sobel(smoothed, axis=0, mode="reflect")
    mag = np.hypot(gx, gy)

    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return FeatureStack(np.zeros((1,) + mag.shape, dtype=np.float32), ("canny",))

    high = float(np.percentile(nonzero, p.high_percentile))
    low = p.low_frac * high

    ridge = _nonmax_suppress(mag, gx, gy)
    strong = ridge & (mag >= high)
    weak = ridge & (mag >= low)

    # Weak pixels survive only when 8-connected (through weak pixels) to a
    # strong pixel.
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        edges = np.zeros_like(weak)
    else:
        strong_labels = np.unique(labels[strong])
        strong_labels = strong_labels[strong_labels > 0]
        edges = np.isin(labels, strong_labels) & weak

    return FeatureStack(edges.astype(np.float32)[None, :, :], ("canny",))
