"""Normalized in-memory detection dataset model.

One representation for every source dataset: images, box annotations,
categories drawn from the six canonical SAR target classes. Ids are
contiguous from 1 so downstream emitters never need remapping tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import SchemaError

CANONICAL_CATEGORIES = ("ship", "aircraft", "car", "bridge", "harbor", "tank")

_AREA_RTOL = 1e-6


@dataclass(frozen=True)
class Instance:
    """One box annotation. bbox is (x, y, w, h), pixels, top-left origin."""

    id: int
    image_id: int
    category_id: int
    bbox: tuple[float, float, float, float]
    area: float
    iscrowd: int = 0

    def __post_init__(self):
        x, y, w, h = self.bbox
        if w <= 0 or h <= 0:
            raise SchemaError(f"instance {self.id}: degenerate box w={w}, h={h}")
        if x < 0 or y < 0:
            raise SchemaError(f"instance {self.id}: negative box origin ({x}, {y})")
        if self.iscrowd not in (0, 1):
            raise SchemaError(f"instance {self.id}: iscrowd must be 0 or 1")
        if self.category_id < 1:
            raise SchemaError(f"instance {self.id}: category_id must be >= 1")
        if self.iscrowd == 0 and not math.isclose(self.area, w * h, rel_tol=_AREA_RTOL):
            raise SchemaError(
                f"instance {self.id}: area {self.area} != w*h {w * h}")
        object.__setattr__(self, "bbox", (float(x), float(y), float(w), float(h)))
        object.__setattr__(self, "area", float(self.area))


def box_instance(id: int, image_id: int, category_id: int,
                 bbox: tuple[float, float, float, float],
                 iscrowd: int = 0) -> Instance:
    """Instance with area derived from the box."""
    x, y, w, h = bbox
    return Instance(id, image_id, category_id, (x, y, w, h), float(w) * float(h),
                    iscrowd)


@dataclass(frozen=True)
class ImageRecord:
    id: int
    file_name: str
    width: int
    height: int
    source_dataset: str = ""

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise SchemaError(
                f"image {self.id} ({self.file_name}): bad dimensions "
                f"{self.width}x{self.height}")
        if not self.file_name:
            raise SchemaError(f"image {self.id}: empty file_name")


@dataclass(frozen=True)
class AnnotatedDataset:
    """Images, annotations, and categories with referential integrity.

    Invariants enforced here: image and annotation ids are unique and
    contiguous from 1; every annotation references an existing image and
    category; every box lies inside its image.
    """

    images: tuple[ImageRecord, ...]
    annotations: tuple[Instance, ...]
    categories: tuple[tuple[int, str], ...] = field(
        default=tuple(enumerate(CANONICAL_CATEGORIES, start=1)))

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        object.__setattr__(self, "categories",
                           tuple((int(i), str(n)) for i, n in self.categories))

        cat_ids = [i for i, _ in self.categories]
        cat_names = [n for _, n in self.categories]
        if len(set(cat_ids)) != len(cat_ids):
            raise SchemaError("duplicate category ids")
        if len(set(cat_names)) != len(cat_names):
            raise SchemaError("duplicate category names")

        img_ids = [img.id for img in self.images]
        if sorted(img_ids) != list(range(1, len(img_ids) + 1)):
            raise SchemaError("image ids must be unique and contiguous from 1")
        ann_ids = [a.id for a in self.annotations]
        if sorted(ann_ids) != list(range(1, len(ann_ids) + 1)):
            raise SchemaError("annotation ids must be unique and contiguous from 1")

        by_id = {img.id: img for img in self.images}
        cat_set = set(cat_ids)
        for a in self.annotations:
            img = by_id.get(a.image_id)
            if img is None:
                raise SchemaError(
                    f"annotation {a.id} references missing image {a.image_id}")
            if a.category_id not in cat_set:
                raise SchemaError(
                    f"annotation {a.id} references missing category {a.category_id}")
            x, y, w, h = a.bbox
            if x + w > img.width + _AREA_RTOL or y + h > img.height + _AREA_RTOL:
                raise SchemaError(
                    f"annotation {a.id} box ({x}, {y}, {w}, {h}) exceeds image "
                    f"{img.id} bounds {img.width}x{img.height}")

    @property
    def num_images(self) -> int:
        return len(self.images)

    @property
    def num_instances(self) -> int:
        return len(self.annotations)

    def category_name(self, category_id: int) -> str:
        for i, n in self.categories:
            if i == category_id:
                return n
        raise SchemaError(f"no category with id {category_id}")

    def annotations_for(self, image_id: int) -> tuple[Instance, ...]:
        return tuple(a for a in self.annotations if a.image_id == image_id)


def renumbered(images, annotations, categories) -> AnnotatedDataset:
    """Dataset with ids rewritten to be contiguous, preserving order.

    Annotation image references are remapped through the image renumbering;
    category ids are preserved as given (callers unify those by name).
    """
    id_map = {}
    new_images = []
    for k, img in enumerate(images, start=1):
        id_map[img.id] = k
        new_images.append(ImageRecord(k, img.file_name, img.width, img.height,
                                      img.source_dataset))
    new_annotations = []
    for k, a in enumerate(annotations, start=1):
        new_annotations.append(Instance(k, id_map[a.image_id], a.category_id,
                                        a.bbox, a.area, a.iscrowd))
    return AnnotatedDataset(tuple(new_images), tuple(new_annotations),
                            tuple(categories))
