"""Exception taxonomy shared by all toolkit modules."""


class MsfaError(Exception):
    """Base class for all toolkit errors."""


class RasterIOError(MsfaError):
    """Unreadable, unsupported, or degenerate image file."""


class TooSmallInputError(MsfaError):
    """Image smaller than the minimum support a descriptor needs."""


class UnknownDescriptorError(MsfaError):
    """Descriptor name outside the supported set."""


class ParameterError(MsfaError):
    """Descriptor or pipeline parameter violates its validity range."""


class SchemaError(MsfaError):
    """Malformed annotation file; message carries the offending JSON path."""


class UnknownCategoryError(MsfaError):
    """Source category with no entry in the mapping table."""


class EmptyDatasetError(MsfaError):
    """Operation requires at least one image."""


class HistogramError(MsfaError):
    """Histogram pair unusable for correlation (space/bin mismatch, constant)."""


class ArchiveError(MsfaError):
    """Corrupt or inconsistent weight archive."""


class TransferError(MsfaError):
    """Weight transfer could not match any key between archives."""


class PlanError(MsfaError):
    """Stage plan invalid where a valid plan is required."""
