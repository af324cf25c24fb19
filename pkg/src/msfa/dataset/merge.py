"""Union of normalized datasets into one standardized manifest."""

from __future__ import annotations

from typing import Sequence

from ..errors import EmptyDatasetError, UnknownCategoryError
from .model import CANONICAL_CATEGORIES, AnnotatedDataset, ImageRecord, Instance


def merge(datasets: Sequence[AnnotatedDataset]) -> AnnotatedDataset:
    """Merge datasets: ids renumbered, categories unified by name.

    Output images are ordered by (source_dataset, file_name) so the
    result is independent of input ordering and worker scheduling.
    Duplicate file names across sources are disambiguated by prefixing
    the source name (and an ordinal when even that collides); nothing is
    ever dropped.
    """
    if not datasets:
        raise EmptyDatasetError("merge needs at least one dataset")

    names_present = set()
    for d in datasets:
        for _, name in d.categories:
            if name not in CANONICAL_CATEGORIES:
                raise UnknownCategoryError(
                    f"category {name!r} is not one of {', '.join(CANONICAL_CATEGORIES)}")
            names_present.add(name)
    ordered_names = [n for n in CANONICAL_CATEGORIES if n in names_present]
    categories = tuple((i, n) for i, n in enumerate(ordered_names, start=1))
    cat_id = {n: i for i, n in categories}

    # (source_dataset, file_name, input position) keyed rows; the input
    # position only breaks exact ties deterministically.
    rows = []
    for pos, d in enumerate(datasets):
        name_of = {i: n for i, n in d.categories}
        for img in d.images:
            anns = [(a, name_of[a.category_id]) for a in d.annotations
                    if a.image_id == img.id]
            rows.append(((img.source_dataset, img.file_name, pos), img, anns))
    rows.sort(key=lambda row: row[0])

    seen: dict[str, int] = {}
    for key, img, _ in rows:
        seen[img.file_name] = seen.get(img.file_name, 0) + 1
    colliding = {name for name, count in seen.items() if count > 1}

    images = []
    annotations = []
    used_names: set[str] = set()
    ann_id = 0
    for new_id, (key, img, anns) in enumerate(rows, start=1):
        file_name = img.file_name
        if file_name in colliding:
            file_name = f"{img.source_dataset}__{file_name}"
        ordinal = 2
        base = file_name
        while file_name in used_names:
            file_name = f"{base}__{ordinal}"
            ordinal += 1
        used_names.add(file_name)

        images.append(ImageRecord(new_id, file_name, img.width, img.height,
                                  img.source_dataset))
        for a, cname in anns:
            ann_id += 1
            annotations.append(Instance(ann_id, new_id, cat_id[cname],
                                        a.bbox, a.area, a.iscrowd))
    return AnnotatedDataset(tuple(images), tuple(annotations), categories)
