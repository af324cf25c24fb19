"""Filter-augmented input composition and tensor file serialization.

An augmented input is the normalized image plus one pooled channel per
selected descriptor, in the order given. An empty descriptor selection
replicates the image three times, which is the plain three-channel
baseline form. Tensor files use a self-describing container: an 8-byte
little-endian header length, a UTF-8 JSON header, then the raw float32
little-endian payload.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ParameterError, SchemaError, UnknownDescriptorError
from .fileio import atomic_write_bytes
from .filters import DESCRIPTOR_NAMES, descriptor_channel
from .raster import Raster

SAR_LABEL = "sar"
LAYOUTS = ("chw", "hwc")

_HEADER_LEN_FORMAT = "<Q"
_BASELINE_CHANNELS = 3


@dataclass(frozen=True)
class AugmentedInput:
    """Ordered channel stack fed to a detector.

    The first channel is always the image itself; descriptor channels
    follow in composition order. All channels share dimensions and lie
    in [0, 1].
    """

    channels: tuple[tuple[str, Raster], ...]

    def __post_init__(self):
        if not self.channels:
            raise ParameterError("augmented input needs at least one channel")
        first_label, first = self.channels[0]
        if first_label != SAR_LABEL:
            raise ParameterError(f"first channel must be {SAR_LABEL!r}, got {first_label!r}")
        for label, r in self.channels:
            if (r.height, r.width) != (first.height, first.width):
                raise ParameterError(
                    f"channel {label!r} is {r.width}x{r.height}, "
                    f"expected {first.width}x{first.height}")
            if not r.is_normalized():
                raise ParameterError(f"channel {label!r} is not normalized")
        object.__setattr__(self, "channels", tuple(self.channels))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.channels)

    @property
    def width(self) -> int:
        return self.channels[0][1].width

    @property
    def height(self) -> int:
        return self.channels[0][1].height

    def values(self) -> np.ndarray:
        """Channel-first float32 array of shape (C, H, W)."""
        return np.stack([r.values for _, r in self.channels], axis=0)


def _check_descriptors(descriptors: Sequence[str]) -> tuple[str, ...]:
    names = tuple(descriptors)
    for name in names:
        if name not in DESCRIPTOR_NAMES:
            raise UnknownDescriptorError(
                f"unknown descriptor {name!r}; expected one of {', '.join(DESCRIPTOR_NAMES)}")
    if len(set(names)) != len(names):
        raise ParameterError(f"duplicate descriptor in {names}")
    return names


def compose(x: Raster, descriptors: Sequence[str],
            params: Mapping[str, object] | None = None,
            triplicate_single: bool = False) -> AugmentedInput:
    """Concatenate the image with its descriptor channels.

    Args:
        x: normalized input raster.
        descriptors: descriptor names in channel order; empty replicates
            the image three times.
        params: optional per-descriptor parameter overrides keyed by name.
        triplicate_single: with exactly one descriptor, emit the
            three-channel [image, M, M] form instead of two channels.
    """
    if not x.is_normalized():
        raise ParameterError("compose expects a normalized raster")
    names = _check_descriptors(descriptors)
    params = params or {}

    if not names:
        return AugmentedInput(tuple((SAR_LABEL, x) for _ in range(_BASELINE_CHANNELS)))

    if triplicate_single and len(names) != 1:
        raise ParameterError(
            f"triplicate_single needs exactly one descriptor, got {len(names)}")

    channels: list[tuple[str, Raster]] = [(SAR_LABEL, x)]
    for name in names:
        pooled = descriptor_channel(name, x, params.get(name))
        r = Raster(pooled.values[0], bit_depth_origin=x.bit_depth_origin,
                   value_range=(0.0, 1.0))
        channels.append((name, r))
        if triplicate_single:
            channels.append((name, r))
    return AugmentedInput(tuple(channels))


class TensorFile(NamedTuple):
    """Decoded tensor container: values in file layout plus metadata."""

    values: np.ndarray
    labels: tuple[str, ...]
    layout: str


def export_tensor(a: AugmentedInput, layout: str, path) -> None:
    """Write the augmented input as a dense float32 tensor file.

    The binary container is self-describing; a human-readable JSON
    sidecar (same path plus ".json") repeats shape, layout, and labels
    for tools that never open the payload.
    """
    if layout not in LAYOUTS:
        raise ParameterError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")
    chw = a.values()
    data = chw if layout == "chw" else np.ascontiguousarray(np.moveaxis(chw, 0, 2))
    header = {
        "dtype": "f32",
        "labels": list(a.labels),
        "layout": layout,
        "shape": list(data.shape),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = data.astype("<f4", copy=False).tobytes(order="C")
    atomic_write_bytes(path, struct.pack(_HEADER_LEN_FORMAT, len(blob)) + blob + payload)
    sidecar = json.dumps(header, sort_keys=True, indent=2) + "\n"
    atomic_write_bytes(Path(f"{path}.json"), sidecar.encode("utf-8"))


def import_tensor(path) -> TensorFile:
    """Read a tensor file back; validates header fields and payload length."""
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise SchemaError(f"{path}: truncated before header length")
    (header_len,) = struct.unpack(_HEADER_LEN_FORMAT, raw[:8])
    if len(raw) < 8 + header_len:
        raise SchemaError(f"{path}: truncated header")
    try:
        header = json.loads(raw[8:8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: malformed header: {exc}") from exc

    for key in ("dtype", "labels", "layout", "shape"):
        if key not in header:
            raise SchemaError(f"{path}: header missing {key!r}")
    if header["dtype"] != "f32":
        raise SchemaError(f"{path}: unsupported dtype {header['dtype']!r}")
    layout = header["layout"]
    if layout not in LAYOUTS:
        raise SchemaError(f"{path}: unknown layout {layout!r}")
    shape = tuple(header["shape"])
    if len(shape) != 3 or any(not isinstance(s, int) or s < 1 for s in shape):
        raise SchemaError(f"{path}: bad shape {shape}")
    labels = tuple(header["labels"])
    n_channels = shape[0] if layout == "chw" else shape[2]
    if len(labels) != n_channels:
        raise SchemaError(f"{path}: {len(labels)} labels for {n_channels} channels")

    expected = int(np.prod(shape)) * 4
    payload = raw[8 + header_len:]
    if len(payload) != expected:
        raise SchemaError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype="<f4").reshape(shape).astype(np.float32)
    return TensorFile(values, labels, layout)
