"""Reflection padding helper.

Reflection avoids injecting artificial border edges that Canny/GRE would
amplify; numpy's "reflect" requires pad < dim, so degenerate tiny inputs
fall back to edge replication.
"""

from __future__ import annotations

import numpy as np


def pad_reflect(values: np.ndarray, top: int, bottom: int, left: int, right: int) -> np.ndarray:
    h, w = values.shape
    mode = "reflect"
    if max(top, bottom) > h - 1 or max(left, right) > w - 1:
        mode = "edge"
    return np.pad(values, ((top, bottom), (left, right)), mode=mode)
