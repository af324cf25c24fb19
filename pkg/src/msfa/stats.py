"""Dataset statistics and corpus-level feature-space comparison.

The domain-gap proxy works on corpus histograms: every image is
normalized, optionally pushed through a descriptor (pooled to a single
channel), and its values are binned uniformly over [0, 1]. Two corpora
are compared by the Pearson correlation of their normalized histograms.
Histogram accumulation is associative, so parallel runs merge to counts
identical to a serial pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset.model import AnnotatedDataset
from .errors import EmptyDatasetError, HistogramError, ParameterError
from .filters import DESCRIPTOR_NAMES, descriptor_channel
from .raster import Raster, load_grayscale, normalize

PIXEL_SPACE = "pixel"
SPACES = (PIXEL_SPACE,) + DESCRIPTOR_NAMES
BINS_DEFAULT = 256


def ins_per_img(instances: int, images: int) -> float:
    """Instances-per-image ratio at 2-decimal half-up rounding."""
    if images < 1:
        raise EmptyDatasetError("ratio needs at least one image")
    ratio = Decimal(instances) / Decimal(images)
    return float(ratio.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def dataset_stats(d: AnnotatedDataset) -> dict:
    """Image/instance counts and Ins/Img overall and per source dataset."""
    if d.num_images == 0:
        raise EmptyDatasetError("dataset has no images")

    sources: dict[str, dict] = {}
    counts_by_image: dict[int, int] = {}
    for a in d.annotations:
        counts_by_image[a.image_id] = counts_by_image.get(a.image_id, 0) + 1
    for img in d.images:
        row = sources.setdefault(img.source_dataset or "",
                                 {"images": 0, "instances": 0})
        row["images"] += 1
        row["instances"] += counts_by_image.get(img.id, 0)
    for row in sources.values():
        row["ins_per_img"] = ins_per_img(row["instances"], row["images"])

    return {
        "images": d.num_images,
        "instances": d.num_instances,
        "ins_per_img": ins_per_img(d.num_instances, d.num_images),
        "sources": dict(sorted(sources.items())),
    }


def category_stats(d: AnnotatedDataset) -> dict:
    """Per-category instance share (percent) and mean instance area."""
    if d.num_images == 0:
        raise EmptyDatasetError("dataset has no images")
    total = d.num_instances
    out = {}
    for cid, name in d.categories:
        areas = [a.area for a in d.annotations if a.category_id == cid]
        count = len(areas)
        out[name] = {
            "instances": count,
            "percentage": 100.0 * count / total if total else 0.0,
            "mean_area": float(np.mean(areas)) if areas else 0.0,
        }
    return out


@dataclass(frozen=True)
class CorpusHistogram:
    """Value histogram accumulated over a whole corpus in one space."""

    space: str
    counts: np.ndarray  # int64, one entry per bin
    total: int

    def __post_init__(self):
        counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.shape[0] < 2:
            raise HistogramError("histogram needs a 1-D array of >= 2 bins")
        if (counts < 0).any():
            raise HistogramError("negative bin count")
        if int(counts.sum()) != self.total:
            raise HistogramError(
                f"counts sum to {int(counts.sum())}, total says {self.total}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def bins(self) -> int:
        return self.counts.shape[0]

    @property
    def normalized(self) -> np.ndarray:
        if self.total == 0:
            raise HistogramError("empty histogram has no frequencies")
        return self.counts.astype(np.float64) / float(self.total)

    def merge(self, other: "CorpusHistogram") -> "CorpusHistogram":
        if other.space != self.space or other.bins != self.bins:
            raise HistogramError(
                f"cannot merge {other.space}/{other.bins} into {self.space}/{self.bins}")
        return CorpusHistogram(self.space, self.counts + other.counts,
                               self.total + other.total)


def bin_values(values: np.ndarray, bins: int) -> np.ndarray:
    """Uniform binning of [0, 1] values; 1.0 lands in the last bin."""
    idx = np.minimum((np.asarray(values, dtype=np.float64) * bins).astype(np.int64),
                     bins - 1)
    idx = np.maximum(idx, 0)
    return np.bincount(idx.ravel(), minlength=bins).astype(np.int64)


def _as_normalized_raster(source) -> Raster:
    r = source if isinstance(source, Raster) else load_grayscale(source)
    return r if r.is_normalized() else normalize(r)


def image_histogram(source, space: str = PIXEL_SPACE, bins: int = BINS_DEFAULT,
                    params=None) -> CorpusHistogram:
    """Histogram of one image (a Raster or a path) in the given space."""
    if space not in SPACES:
        raise ParameterError(f"unknown space {space!r}; expected one of {SPACES}")
    if bins < 2:
        raise ParameterError(f"bins must be >= 2, got {bins}")
    r = _as_normalized_raster(source)
    if space == PIXEL_SPACE:
        values = r.values
    else:
        values = descriptor_channel(space, r, params).values[0]
    counts = bin_values(values, bins)
    return CorpusHistogram(space, counts, int(counts.sum()))


def corpus_histogram(sources: Iterable, space: str = PIXEL_SPACE,
                     bins: int = BINS_DEFAULT, params=None) -> CorpusHistogram:
    """Accumulated histogram over a corpus of images."""
    acc = None
    for source in sources:
        h = image_histogram(source, space, bins, params)
        acc = h if acc is None else acc.merge(h)
    if acc is None:
        raise EmptyDatasetError("corpus is empty")
    return acc


def pcc(a: CorpusHistogram, b: CorpusHistogram) -> float:
    """Pearson correlation of two corpus histograms' frequency vectors."""
    if a.space != b.space:
        raise HistogramError(f"space mismatch: {a.space} vs {b.space}")
    if a.bins != b.bins:
        raise HistogramError(f"bin-count mismatch: {a.bins} vs {b.bins}")
    fa = a.normalized
    fb = b.normalized
    da = fa - fa.mean()
    db = fb - fb.mean()
    na = float(np.sqrt(np.sum(da * da)))
    nb = float(np.sqrt(np.sum(db * db)))
    if na == 0.0 or nb == 0.0:
        raise HistogramError("constant histogram: correlation undefined")
    value = float(np.sum(da * db) / (na * nb))
    return max(-1.0, min(1.0, value))


def speckle(r: Raster, seed: int) -> Raster:
    """Multiply by unit-mean single-look gamma noise (shape 1, mean 1).

    The standard intensity-speckle model for coherent imaging; the output
    is un-normalized (its maximum can exceed the input's).
    """
    rng = np.random.default_rng(seed)
    noise = rng.gamma(shape=1.0, scale=1.0, size=r.values.shape)
    out = (r.values.astype(np.float64) * noise).astype(np.float32)
    hi = float(out.max())
    return Raster(out, bit_depth_origin=r.bit_depth_origin,
                  value_range=(0.0, hi if hi > 0 else 1.0))


def pcc_report(corpus_a: Sequence, corpus_b: Sequence,
               spaces: Sequence[str] = SPACES, bins: int = BINS_DEFAULT,
               params: Mapping[str, object] | None = None,
               names: tuple[str, str] = ("A", "B")) -> dict:
    """Per-space PCC between two corpora, as a JSON-ready report."""
    parms = params or {}
    values = {}
    for space in spaces:
        pm = None if space == PIXEL_SPACE else parms.get(space)
        ha = corpus_histogram(corpus_a, space, bins, pm)
        hb = corpus_histogram(corpus_b, space, bins, pm)
        values[space] = pcc(ha, hb)
    return {
        "corpora": {names[0]: len(corpus_a), names[1]: len(corpus_b)},
        "bins": bins,
        "pcc": values,
    }
