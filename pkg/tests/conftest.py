"""Shared fixtures and synthetic-image helpers."""

from __future__ import annotations

import numpy as np
import pytest

from msfa.raster import Raster, resample_values


def make_raster(values, normalized=True) -> Raster:
    arr = np.asarray(values, dtype=np.float32)
    rng = (0.0, 1.0) if normalized else (0.0, float(max(arr.max(), 1.0)))
    return Raster(arr, value_range=rng)


def random_raster(rng, h=64, w=64) -> Raster:
    return make_raster(rng.random((h, w), dtype=np.float32))


def natural_image(rng, size=64) -> Raster:
    """Piecewise-smooth scene: blurred field plus rectangles and discs.

    A stand-in for photographic content: smooth regions separated by
    edges, moderate noise, full [0, 1] range after clipping.
    """
    base = rng.random((size // 8, size // 8)).astype(np.float32)
    img = resample_values(base, size, size, "bilinear").astype(np.float64)
    for _ in range(int(rng.integers(2, 6))):
        x0, y0 = rng.integers(0, size - 8, 2)
        w, h = rng.integers(4, size // 2, 2)
        val = rng.random()
        win = img[y0:min(y0 + h, size), x0:min(x0 + w, size)]
        img[y0:min(y0 + h, size), x0:min(x0 + w, size)] = 0.6 * val + 0.4 * win
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(int(rng.integers(1, 4))):
        cx, cy = rng.integers(8, size - 8, 2)
        rad = int(rng.integers(3, 10))
        img[(xx - cx) ** 2 + (yy - cy) ** 2 <= rad ** 2] = rng.random()
    img += 0.03 * rng.standard_normal((size, size))
    return make_raster(np.clip(img, 0.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
