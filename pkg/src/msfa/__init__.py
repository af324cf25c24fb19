"""SAR detection dataset engineering and filter-augmented inputs.

The package covers the data side of multi-stage SAR detector training:
handcrafted feature descriptors (HOG, Canny, Haar-like, wavelet
scattering, ratio-gradient edges), filter-augmented input composition,
dataset standardization (ingest, split, slice, merge, COCO I/O),
corpus-level domain-gap statistics, and pretraining-stage planning with
checkpoint weight surgery.
"""

from .augment import AugmentedInput, compose, export_tensor, import_tensor
from .errors import (
    ArchiveError,
    EmptyDatasetError,
    HistogramError,
    MsfaError,
    ParameterError,
    PlanError,
    RasterIOError,
    SchemaError,
    TooSmallInputError,
    TransferError,
    UnknownCategoryError,
    UnknownDescriptorError,
)
from .filters import (
    DESCRIPTOR_NAMES,
    FeatureStack,
    apply_descriptor,
    descriptor_channel,
    pool_to_channel,
)
from .raster import Raster, load_grayscale, normalize, resample, save_grayscale
from .stats import CorpusHistogram, corpus_histogram, dataset_stats, pcc

__version__ = "0.1.0"

__all__ = [
    "ArchiveError",
    "AugmentedInput",
    "CorpusHistogram",
    "DESCRIPTOR_NAMES",
    "EmptyDatasetError",
    "FeatureStack",
    "HistogramError",
    "MsfaError",
    "ParameterError",
    "PlanError",
    "Raster",
    "RasterIOError",
    "SchemaError",
    "TooSmallInputError",
    "TransferError",
    "UnknownCategoryError",
    "UnknownDescriptorError",
    "apply_descriptor",
    "compose",
    "corpus_histogram",
    "dataset_stats",
    "descriptor_channel",
    "export_tensor",
    "import_tensor",
    "load_grayscale",
    "normalize",
    "pcc",
    "pool_to_channel",
    "resample",
    "save_grayscale",
    "__version__",
]
