"""Multi-channel feature map container shared by all descriptors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError
from ..raster import resample_values


@dataclass(frozen=True)
class FeatureStack:
    """Stack of equally sized feature channels with per-channel labels.

    Attributes:
        values: float32 array of shape (channels, height, width).
        labels: one semantic label per channel, e.g. a scattering path
            "s2[j1=0,l1=3,j2=1,l2=5]" or simply "canny".
    """

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float32)
        if v.ndim != 3:
            raise ParameterError(f"feature stack must be 3-D (C,H,W), got ndim={v.ndim}")
        if v.shape[0] < 1:
            raise ParameterError("feature stack needs at least one channel")
        if len(self.labels) != v.shape[0]:
            raise ParameterError(
                f"{len(self.labels)} labels for {v.shape[0]} channels")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]


def pool_to_channel(fs: FeatureStack, target_w: int, target_h: int) -> FeatureStack:
    """Render a stack as one image-sized channel.

    Channel-wise mean, bilinear resample to (target_w, target_h), then
    minmax renormalization to [0, 1]; a constant map goes to all zeros.
    """
    mean = fs.values.astype(np.float64).mean(axis=0).astype(np.float32)
    pooled = resample_values(mean, target_w, target_h, method="bilinear")
    lo = float(pooled.min())
    hi = float(pooled.max())
    if hi <= lo:
        out = np.zeros_like(pooled)
    else:
        out = np.clip((pooled - np.float32(lo)) / np.float32(hi - lo), 0.0, 1.0)
    label = fs.labels[0] if fs.channels == 1 else f"pool[{fs.channels}ch]"
    return FeatureStack(out[None, :, :], (label,))
