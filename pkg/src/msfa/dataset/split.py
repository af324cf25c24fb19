"""Seeded deterministic train/val/test partitioning."""

from __future__ import annotations

import random
import warnings

from ..errors import EmptyDatasetError, ParameterError
from .model import AnnotatedDataset, renumbered

_RATIO_ATOL = 1e-9


def split_dataset(d: AnnotatedDataset, ratios: tuple[float, float, float],
                  seed: int) -> tuple[AnnotatedDataset, AnnotatedDataset, AnnotatedDataset]:
    """Partition images into train/val/test by a seeded shuffle.

    Sizes follow a floor policy: n_val = floor(n * r_val),
    n_test = floor(n * r_test), remainder to train. 1,160 images at
    8:1:1 therefore give exactly 928/116/116. Membership comes from the
    shuffled order; within each split, images keep their original order.
    """
    r_train, r_val, r_test = ratios
    if r_train <= 0 or r_val <= 0 or r_test <= 0:
        raise ParameterError(f"split ratios must be positive, got {ratios}")
    if abs(r_train + r_val + r_test - 1.0) > _RATIO_ATOL:
        raise ParameterError(f"split ratios must sum to 1, got {ratios}")
    n = d.num_images
    if n == 0:
        raise EmptyDatasetError("cannot split an empty dataset")

    n_val = int(n * r_val)
    n_test = int(n * r_test)
    n_train = n - n_val - n_test

    order = list(range(n))
    random.Random(seed).shuffle(order)
    train_idx = set(order[:n_train])
    val_idx = set(order[n_train:n_train + n_val])

    buckets: tuple[list, list, list] = ([], [], [])
    for i, img in enumerate(d.images):
        if i in train_idx:
            buckets[0].append(img)
        elif i in val_idx:
            buckets[1].append(img)
        else:
            buckets[2].append(img)

    names = ("train", "val", "test")
    out = []
    for name, images in zip(names, buckets):
        if not images:
            warnings.warn(f"split {name!r} is empty under the floor policy "
                          f"(n={n}, ratios={ratios})", stacklevel=2)
        ids = {img.id for img in images}
        annotations = [a for a in d.annotations if a.image_id in ids]
        out.append(renumbered(images, annotations, d.categories))
    return out[0], out[1], out[2]
