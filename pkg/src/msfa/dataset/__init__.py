"""Detection-dataset standardization: ingest, split, slice, merge, COCO I/O."""

from .coco_io import from_coco, from_coco_dict, to_coco
from .ingest import INGEST_FORMATS, ingest, map_category
from .merge import merge
from .model import (
    CANONICAL_CATEGORIES,
    AnnotatedDataset,
    ImageRecord,
    Instance,
    box_instance,
    renumbered,
)
from .slicing import (
    KEEP_FRACTION_DEFAULT,
    MIN_AREA_DEFAULT,
    SlicePatch,
    SliceReport,
    SliceSpec,
    multi_scale_slice,
    patch_file_name,
    slice_image,
    slice_positions,
    slice_windows,
)
from .split import split_dataset

__all__ = [
    "CANONICAL_CATEGORIES",
    "INGEST_FORMATS",
    "KEEP_FRACTION_DEFAULT",
    "MIN_AREA_DEFAULT",
    "AnnotatedDataset",
    "ImageRecord",
    "Instance",
    "SlicePatch",
    "SliceReport",
    "SliceSpec",
    "box_instance",
    "from_coco",
    "from_coco_dict",
    "ingest",
    "map_category",
    "merge",
    "multi_scale_slice",
    "patch_file_name",
    "renumbered",
    "slice_image",
    "slice_positions",
    "slice_windows",
    "split_dataset",
    "to_coco",
]
