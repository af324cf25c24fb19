"""Oriented-gradient histogram map, rendered at image resolution.

Per-cell magnitude-weighted histograms over unsigned orientation
[0, 180) degrees, L2-normalized over sliding block x block cell groups,
averaged back to one scalar per cell, then bilinearly lifted to the
input size. Block normalization is what makes the map invariant to
global intensity scaling.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError, TooSmallInputError
from ..raster import Raster, resample_values
from .params import HogParams
from .stack import FeatureStack


def cell_histograms(values: np.ndarray, cell: int, bins: int) -> np.ndarray:
    """Magnitude-weighted orientation histograms, shape (n_cy, n_cx, bins).

    Gradients are centered differences (one-sided at borders); trailing
    pixels that do not fill a cell are ignored.
    """
    v = values.astype(np.float64)
    gy, gx = np.gradient(v)
    mag = np.hypot(gx, gy)
    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    bin_width = 180.0 / bins
    idx = np.minimum((ang / bin_width).astype(np.int64), bins - 1)

    n_cy = values.shape[0] // cell
    n_cx = values.shape[1] // cell
    hist = np.zeros((n_cy, n_cx, bins), dtype=np.float64)
    mag = mag[:n_cy * cell, :n_cx * cell]
    idx = idx[:n_cy * cell, :n_cx * cell]
    for b in range(bins):
        weighted = np.where(idx == b, mag, 0.0)
        # Sum each cell by a two-step reshape.
        hist[:, :, b] = (
            weighted.reshape(n_cy, cell, n_cx, cell).sum(axis=(1, 3)))
    return hist


def hog_map(r: Raster, params: HogParams | None = None) -> FeatureStack:
    """Single-channel HOG energy map at the raster's resolution."""
    p = params or HogParams()
    if not r.is_normalized():
        raise ParameterError("hog expects a normalized raster (values in [0, 1])")

    min_dim = p.block * p.cell
    if r.height < min_dim or r.width < min_dim:
        raise TooSmallInputError(
            f"image {r.width}x{r.height} smaller than one block "
            f"({min_dim}x{min_dim})")

    hist = cell_histograms(r.values, p.cell, p.bins)
    n_cy, n_cx, bins = hist.shape

    # Sliding-block L2 normalization; each cell averages the normalized
    # values over every block it belongs to.
    acc = np.zeros_like(hist)
    cnt = np.zeros((n_cy, n_cx), dtype=np.float64)
    for by in range(n_cy - p.block + 1):
        for bx in range(n_cx - p.block + 1):
            blk = hist[by:by + p.block, bx:bx + p.block, :]
            norm = np.sqrt(np.sum(blk * blk) + p.norm_eps ** 2)
            if norm > 0:
                acc[by:by + p.block, bx:bx + p.block, :] += blk / norm
            cnt[by:by + p.block, bx:bx + p.block] += 1.0

    cnt = np.maximum(cnt, 1.0)
    per_cell = (acc / cnt[:, :, None]).mean(axis=2)
    lifted = resample_values(per_cell.astype(np.float32), r.width, r.height, "bilinear")
    return FeatureStack(lifted[None, :, :], ("hog",))
