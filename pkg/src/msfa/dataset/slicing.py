"""Sliding-window image slicing with annotation adjustment.

Patch grids tile the image with a fixed stride plus a final clamped
(right/bottom-aligned) position, so every pixel is covered without any
padding. Instances are kept in a patch when at least keep_fraction of
their area survives clipping; kept boxes are clipped and re-origined to
patch coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from ..errors import ParameterError
from ..raster import Raster, resample
from .model import Instance

KEEP_FRACTION_DEFAULT = 0.6
MIN_AREA_DEFAULT = 4.0


@dataclass(frozen=True)
class SliceSpec:
    patch: int
    overlap: int
    keep_fraction: float = KEEP_FRACTION_DEFAULT
    min_area: float = MIN_AREA_DEFAULT
    scales: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self):
        if self.patch < 1:
            raise ParameterError(f"patch must be >= 1, got {self.patch}")
        if not (0 <= self.overlap < self.patch):
            raise ParameterError(
                f"overlap must be in [0, patch), got {self.overlap} for patch {self.patch}")
        if not (0.0 < self.keep_fraction <= 1.0):
            raise ParameterError(
                f"keep_fraction must be in (0, 1], got {self.keep_fraction}")
        if self.min_area < 0:
            raise ParameterError(f"min_area must be >= 0, got {self.min_area}")
        scales = tuple(float(s) for s in self.scales)
        if not scales or any(s <= 0 for s in scales):
            raise ParameterError(f"scales must be non-empty and positive, got {scales}")
        object.__setattr__(self, "scales", scales)

    @property
    def stride(self) -> int:
        return self.patch - self.overlap


def slice_positions(dim: int, patch: int, stride: int) -> list[int]:
    """Top-left positions along one axis: 0, stride, ... while the window
    fits, plus a final clamped dim-patch position when not already reached."""
    if dim <= patch:
        return [0]
    positions = list(range(0, dim - patch + 1, stride))
    if positions[-1] != dim - patch:
        positions.append(dim - patch)
    return positions


def slice_windows(width: int, height: int, spec: SliceSpec) -> list[tuple[int, int, int, int]]:
    """Patch windows (x, y, w, h); a sub-patch image yields itself whole."""
    pw = min(spec.patch, width)
    ph = min(spec.patch, height)
    xs = slice_positions(width, spec.patch, spec.stride)
    ys = slice_positions(height, spec.patch, spec.stride)
    return [(x, y, pw, ph) for y in ys for x in xs]


class SlicePatch(NamedTuple):
    window: tuple[int, int, int, int]  # x, y, w, h in (scaled) source pixels
    scale: float
    raster: Raster | None
    instances: tuple[Instance, ...]


class SliceReport(NamedTuple):
    total: int    # instances on the input image
    kept: int     # instances surviving in at least one patch
    dropped: int  # instances lost to the keep_fraction / min_area rules

    def __add__(self, other: "SliceReport") -> "SliceReport":
        return SliceReport(self.total + other.total, self.kept + other.kept,
                           self.dropped + other.dropped)


def _clip_instance(inst: Instance, window: tuple[int, int, int, int],
                   spec: SliceSpec) -> Instance | None:
    wx, wy, ww, wh = window
    x, y, w, h = inst.bbox
    ix0 = max(x, wx)
    iy0 = max(y, wy)
    ix1 = min(x + w, wx + ww)
    iy1 = min(y + h, wy + wh)
    cw = ix1 - ix0
    ch = iy1 - iy0
    if cw <= 0 or ch <= 0:
        return None
    clipped_area = cw * ch
    if clipped_area / (w * h) < spec.keep_fraction:
        return None
    if clipped_area < spec.min_area:
        return None
    return Instance(inst.id, inst.image_id, inst.category_id,
                    (ix0 - wx, iy0 - wy, cw, ch), clipped_area, inst.iscrowd)


def slice_image(r: Raster | None, instances: Sequence[Instance],
                spec: SliceSpec, width: int | None = None,
                height: int | None = None,
                scale: float = 1.0) -> tuple[list[SlicePatch], SliceReport]:
    """Cut one image (or just its geometry) into overlapping patches.

    Pass a Raster to get pixel windows, or width/height alone for
    annotation-only slicing. Patch instances keep their source ids so
    callers can track which originals survived.
    """
    if r is not None:
        width, height = r.width, r.height
    if width is None or height is None:
        raise ParameterError("slice_image needs a raster or explicit dimensions")

    patches = []
    kept_ids = set()
    for window in slice_windows(width, height, spec):
        wx, wy, ww, wh = window
        kept = []
        for inst in instances:
            clipped = _clip_instance(inst, window, spec)
            if clipped is not None:
                kept.append(clipped)
                kept_ids.add(inst.id)
        patch_raster = None
        if r is not None:
            patch_raster = Raster(r.values[wy:wy + wh, wx:wx + ww],
                                  r.bit_depth_origin, r.value_range)
        patches.append(SlicePatch(window, scale, patch_raster, tuple(kept)))

    total = len(instances)
    kept_count = len(kept_ids)
    return patches, SliceReport(total, kept_count, total - kept_count)


def _scale_instances(instances: Sequence[Instance], s: float,
                     width: int, height: int) -> list[Instance]:
    out = []
    for inst in instances:
        x, y, w, h = inst.bbox
        sx, sy, sw, sh = x * s, y * s, w * s, h * s
        # Rounded image dimensions can land a hair inside the scaled box.
        sw = min(sw, width - sx)
        sh = min(sh, height - sy)
        if sw <= 0 or sh <= 0:
            continue
        out.append(Instance(inst.id, inst.image_id, inst.category_id,
                            (sx, sy, sw, sh), sw * sh, inst.iscrowd))
    return out


def multi_scale_slice(r: Raster, instances: Sequence[Instance],
                      spec: SliceSpec) -> tuple[list[SlicePatch], SliceReport]:
    """Slice bilinearly rescaled copies of the image at every spec scale.

    An instance counts as kept when it survives at one or more scales.
    """
    patches: list[SlicePatch] = []
    kept_union: set[int] = set()
    for s in spec.scales:
        if s == 1.0:
            scaled = r
            scaled_instances = list(instances)
        else:
            new_w = max(1, round(r.width * s))
            new_h = max(1, round(r.height * s))
            scaled = resample(r, new_w, new_h, method="bilinear")
            scaled_instances = _scale_instances(instances, s, new_w, new_h)
        scale_patches, _ = slice_image(scaled, scaled_instances, spec, scale=s)
        patches.extend(scale_patches)
        for p in scale_patches:
            kept_union.update(inst.id for inst in p.instances)

    total = len(instances)
    kept = len(kept_union)
    return patches, SliceReport(total, kept, total - kept)


def patch_file_name(stem: str, scale: float, x: int, y: int,
                    suffix: str = ".png") -> str:
    """Deterministic, collision-free patch naming."""
    return f"{stem}__s{scale:g}__{x}_{y}{suffix}"
