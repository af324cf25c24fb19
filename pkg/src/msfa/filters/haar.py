"""Haar-like template responses over a sliding window, via integral images.

Six fixed templates: 2-rect edges (H/V), 3-rect lines (H/V), a 4-rect
diagonal, and a center-surround point. Positive and negative regions are
balanced as mean differences so a constant image cancels to zero (up to
floating-point rounding) for every window size.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError, TooSmallInputError
from ..raster import IntegralImage, Raster
from ._pad import pad_reflect
from .params import HaarParams
from .stack import FeatureStack

# Each rect is (rx, ry, rw, rh) in window-relative pixels.
Rect = tuple[int, int, int, int]


def haar_templates(w: int) -> list[tuple[str, list[Rect], list[Rect]]]:
    """(name, positive rects, negative rects) for a window of side w."""
    half = w // 2
    # Line strips are kept narrow (w/8) so a plain step edge cannot
    # half-trigger them; a step then peaks at the edge templates alone.
    strip = max(w // 8, 1)
    q = max(w // 4, 1)  # point-template center inset
    templates = [
        ("edge_v", [(0, 0, half, w)], [(half, 0, w - half, w)]),
        ("edge_h", [(0, 0, w, half)], [(0, half, w, w - half)]),
        ("line_v", [(0, 0, strip, w), (w - strip, 0, strip, w)],
                   [(strip, 0, w - 2 * strip, w)]),
        ("line_h", [(0, 0, w, strip), (0, w - strip, w, strip)],
                   [(0, strip, w, w - 2 * strip)]),
        ("diag", [(0, 0, half, half), (half, half, w - half, w - half)],
                 [(half, 0, w - half, half), (0, half, half, w - half)]),
        ("point", [(q, q, w - 2 * q, w - 2 * q)],
                  None),  # surround = window minus center, filled in below
    ]
    out = []
    for name, pos, neg in templates:
        if neg is None:
            cx, cy, cw, ch = pos[0]
            neg = [(0, 0, w, cy), (0, cy + ch, w, w - cy - ch),
                   (0, cy, cx, ch), (cx + cw, cy, w - cx - cw, ch)]
            neg = [rect for rect in neg if rect[2] > 0 and rect[3] > 0]
        out.append((name, pos, neg))
    return out


def template_response(ii: IntegralImage, x0: np.ndarray, y0: np.ndarray,
                      pos: list[Rect], neg: list[Rect]) -> np.ndarray:
    """Balanced response sum(pos) - (area_pos/area_neg) * sum(neg)."""
    area_pos = sum(rw * rh for _, _, rw, rh in pos)
    area_neg = sum(rw * rh for _, _, rw, rh in neg)
    acc = np.zeros(x0.shape, dtype=np.float64)
    for rx, ry, rw, rh in pos:
        acc += ii.rect_sums(x0 + rx, y0 + ry, rw, rh)
    ratio = area_pos / area_neg
    for rx, ry, rw, rh in neg:
        acc -= ratio * ii.rect_sums(x0 + rx, y0 + ry, rw, rh)
    return acc


def haar_map(r: Raster, params: HaarParams | None = None) -> FeatureStack:
    """Mean absolute template response per pixel, normalized by window area."""
    p = params or HaarParams()
    if not r.is_normalized():
        raise ParameterError("haar expects a normalized raster (values in [0, 1])")
    w = p.window
    if r.width < w or r.height < w:
        raise TooSmallInputError(
            f"image {r.width}x{r.height} smaller than the {w}x{w} window")

    half = w // 2
    padded = pad_reflect(r.values.astype(np.float64), half, half, half, half)
    ii = IntegralImage(padded)

    # Window for output pixel (x, y) is [x, x+w) x [y, y+w) in padded coords.
    ys, xs = np.mgrid[0:r.height, 0:r.width]
    acc = np.zeros((r.height, r.width), dtype=np.float64)
    templates = haar_templates(w)
    for _, pos, neg in templates:
        acc += np.abs(template_response(ii, xs, ys, pos, neg))
    out = acc / (len(templates) * w * w)
    return FeatureStack(out.astype(np.float32)[None, :, :], ("haar",))
