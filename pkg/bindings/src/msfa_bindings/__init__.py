"""In-process bindings over the msfa toolkit for training pipelines.

The batch CLI moves tensors through files; this bridge moves the same
values through memory. It exposes per-image channel composition, the
five descriptor maps, corpus histogram correlation, and weight-archive
read/write/transfer, exchanging contiguous float32 numpy buffers with
the caller. Every function is a thin, stateless adapter over the core
package, so results are bit-identical to the file-based path and calls
are safe from any number of threads.

Errors are the core exception types (ParameterError,
UnknownDescriptorError, ArchiveError, TransferError, ...), so a host
that already handles the CLI's failure modes needs no new handling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from msfa import ParameterError, Raster, apply_descriptor, compose, descriptor_channel
from msfa.stats import BINS_DEFAULT, corpus_histogram, pcc
from msfa.weights import (
    BACKBONE_PREFIX_DEFAULT,
    TransferReport,
    WeightArchive,
    read_archive,
    transfer_weights,
    write_archive,
)

__version__ = "0.1.0"

__all__ = [
    "BoundArray",
    "archive_to_npz",
    "archive_to_state_dict",
    "bind_compose",
    "bind_descriptor",
    "bind_pcc",
    "bind_read_archive",
    "bind_transfer",
    "bind_write_archive",
    "npz_to_archive",
    "state_dict_to_archive",
    "__version__",
]


@dataclass(frozen=True)
class BoundArray:
    """Contiguous read-only float32 buffer with optional channel labels.

    The values are exactly the core's in-memory representation; the
    constructor refuses anything that would need a dtype conversion
    rather than converting silently.
    """

    values: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        arr = self.values
        if not isinstance(arr, np.ndarray) or arr.dtype != np.float32:
            raise ParameterError(
                f"BoundArray holds float32 arrays, got "
                f"{getattr(arr, 'dtype', type(arr).__name__)}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.labels and len(self.labels) != arr.shape[0]:
            raise ParameterError(
                f"{len(self.labels)} labels for {arr.shape[0]} channels")

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    @property
    def buffer(self) -> memoryview:
        """Zero-copy handle to the underlying bytes."""
        return memoryview(self.values)

    def __array__(self, dtype=None, copy=None):
        if dtype is None or np.dtype(dtype) == np.float32:
            return self.values
        raise ParameterError(
            f"refusing silent conversion from float32 to {np.dtype(dtype)}")


def _as_plane(image) -> Raster:
    """Validate a 2-D real-valued array in [0, 1] and wrap it."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ParameterError(f"expected a 2-D image array, got {arr.ndim}-D")
    if not np.issubdtype(arr.dtype, np.floating):
        raise ParameterError(
            f"expected a real-valued image array, got dtype {arr.dtype}")
    return Raster(np.ascontiguousarray(arr, dtype=np.float32),
                  value_range=(0.0, 1.0))


def bind_compose(image, descriptors: Sequence[str],
                 params: Mapping[str, object] | None = None,
                 triplicate_single: bool = False) -> BoundArray:
    """Image plus one pooled channel per descriptor, channel-first.

    Value-equivalent to the CLI `augment` path: channel 0 is the image,
    descriptor channels follow in the given order, and an empty
    selection replicates the image three times.
    """
    a = compose(_as_plane(image), tuple(descriptors), params, triplicate_single)
    return BoundArray(a.values(), a.labels)


def bind_descriptor(image, name: str, params=None,
                    pooled: bool = False) -> BoundArray:
    """One descriptor map for an image.

    Raw form keeps the descriptor's native channel count and size;
    ``pooled=True`` returns the single [0, 1] channel at image size
    that composition uses.
    """
    r = _as_plane(image)
    stack = (descriptor_channel(name, r, params) if pooled
             else apply_descriptor(name, r, params))
    return BoundArray(stack.values, stack.labels)


def bind_pcc(corpus_a: Sequence, corpus_b: Sequence, space: str = "pixel",
             bins: int = BINS_DEFAULT, params=None) -> float:
    """Histogram correlation between two in-memory image corpora."""
    hist_a = corpus_histogram([_as_plane(x) for x in corpus_a], space, bins, params)
    hist_b = corpus_histogram([_as_plane(x) for x in corpus_b], space, bins, params)
    return pcc(hist_a, hist_b)


def bind_read_archive(path) -> dict[str, np.ndarray]:
    """Weight archive as {key: read-only contiguous float32 array}."""
    a = read_archive(path)
    return {key: a[key] for key in a.keys()}


def bind_write_archive(tensors: Mapping[str, np.ndarray], path,
                       stage_id: str = "",
                       backbone_prefix: str = BACKBONE_PREFIX_DEFAULT) -> None:
    """Write tensors as a weight archive (keys sorted, byte-stable)."""
    write_archive(WeightArchive(dict(tensors), stage_id, backbone_prefix), path)


def bind_transfer(src, dst, mode: str, backbone_prefix: str | None = None,
                  out=None) -> TransferReport:
    """Transfer weights between archive files; mirrors `weights transfer`.

    Reads the source archive and the destination skeleton, runs the
    same transfer as the CLI, writes the result archive to ``out`` when
    given, and returns the copied/adapted/skipped report.
    """
    result, report = transfer_weights(read_archive(src), read_archive(dst),
                                      mode, backbone_prefix)
    if out is not None:
        write_archive(result, out)
    return report


def archive_to_npz(archive_path, npz_path) -> None:
    """Convert a weight archive to numpy's .npz checkpoint container.

    Tensor keys and values carry over unchanged; archive metadata has
    no .npz representation and is dropped.
    """
    a = read_archive(archive_path)
    np.savez(npz_path, **{key: a[key] for key in a.keys()})


def npz_to_archive(npz_path, archive_path, stage_id: str = "",
                   backbone_prefix: str = BACKBONE_PREFIX_DEFAULT) -> None:
    """Convert a .npz checkpoint container to a weight archive.

    Entries must be float32 already; anything else is refused rather
    than converted silently.
    """
    with np.load(npz_path) as bundle:
        tensors = {}
        for key in bundle.files:
            arr = bundle[key]
            if arr.dtype != np.float32:
                raise ParameterError(
                    f"npz entry {key!r} has dtype {arr.dtype}, expected float32")
            tensors[key] = arr
    write_archive(WeightArchive(tensors, stage_id, backbone_prefix), archive_path)


def _torch():
    try:
        import torch
    except ImportError as exc:
        raise ImportError(
            "state-dict conversion needs the optional torch dependency "
            "(pip install msfa-bindings[torch])") from exc
    return torch


def archive_to_state_dict(archive_path, checkpoint_path) -> None:
    """Convert a weight archive to a torch checkpoint file.

    The checkpoint holds a flat {key: float32 tensor} mapping as
    produced by a module's state_dict(); archive metadata has no
    state-dict representation and is dropped.
    """
    torch = _torch()
    a = read_archive(archive_path)
    state = {key: torch.from_numpy(np.array(a[key])) for key in a.keys()}
    torch.save(state, checkpoint_path)


def state_dict_to_archive(checkpoint_path, archive_path, stage_id: str = "",
                          backbone_prefix: str = BACKBONE_PREFIX_DEFAULT) -> None:
    """Convert a torch checkpoint holding a flat state dict to an archive.

    Values must be float32 tensors (or arrays); anything else is
    refused rather than converted silently.
    """
    torch = _torch()
    state = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
    if not isinstance(state, dict):
        raise ParameterError(
            f"checkpoint holds {type(state).__name__}, expected a state dict")
    tensors = {}
    for key, value in state.items():
        arr = value.numpy() if hasattr(value, "numpy") else np.asarray(value)
        if arr.dtype != np.float32:
            raise ParameterError(
                f"state-dict entry {key!r} has dtype {arr.dtype}, "
                f"expected float32")
        tensors[str(key)] = arr
    write_archive(WeightArchive(tensors, stage_id, backbone_prefix), archive_path)
