"""Checkpoint weight archives and transfer surgery.

The archive container is framework-neutral: an 8-byte little-endian
header length, a JSON header mapping each key to {dtype, shape, offset,
nbytes}, then one contiguous float32 little-endian payload. Transfer
copies name-and-shape matches from a source archive into a destination
skeleton; first-layer channel mismatches are adapted instead of skipped
so augmented-input models can start from standard pretrained weights.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ArchiveError, TransferError
from .fileio import atomic_write_bytes

BACKBONE_PREFIX_DEFAULT = "backbone."

_HEADER_LEN_FORMAT = "<Q"


@dataclass(frozen=True)
class WeightArchive:
    """Immutable map from dotted keys to float32 tensors."""

    tensors: dict[str, np.ndarray]
    stage_id: str = ""
    backbone_prefix: str = BACKBONE_PREFIX_DEFAULT

    def __post_init__(self):
        frozen = {}
        for key, value in self.tensors.items():
            arr = np.ascontiguousarray(value, dtype=np.float32)
            arr.setflags(write=False)
            frozen[str(key)] = arr
        object.__setattr__(self, "tensors", frozen)

    def keys(self):
        return self.tensors.keys()

    def __getitem__(self, key: str) -> np.ndarray:
        return self.tensors[key]

    def __contains__(self, key: str) -> bool:
        return key in self.tensors

    def __len__(self) -> int:
        return len(self.tensors)


def write_archive(a: WeightArchive, path) -> None:
    """Serialize with keys in sorted order so files are byte-stable."""
    entries = {}
    chunks = []
    offset = 0
    for key in sorted(a.tensors):
        arr = a.tensors[key]
        blob = arr.astype("<f4", copy=False).tobytes(order="C")
        entries[key] = {
            "dtype": "f32",
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(blob),
        }
        chunks.append(blob)
        offset += len(blob)
    header = {
        "metadata": {"stage_id": a.stage_id, "backbone_prefix": a.backbone_prefix},
        "tensors": entries,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    atomic_write_bytes(path, struct.pack(_HEADER_LEN_FORMAT, len(blob)) + blob
                       + b"".join(chunks))


def read_archive(path) -> WeightArchive:
    raw = Path(path).read_bytes()
    if len(raw) < 8:
        raise ArchiveError(f"{path}: truncated before header length")
    (header_len,) = struct.unpack(_HEADER_LEN_FORMAT, raw[:8])
    if len(raw) < 8 + header_len:
        raise ArchiveError(f"{path}: truncated header")
    try:
        header = json.loads(raw[8:8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"{path}: corrupt header: {exc}") from exc
    if not isinstance(header, dict) or "tensors" not in header:
        raise ArchiveError(f"{path}: header missing tensor table")

    payload = raw[8 + header_len:]
    tensors = {}
    for key, entry in header["tensors"].items():
        if key in tensors:
            raise ArchiveError(f"{path}: duplicate key {key!r}")
        try:
            shape = tuple(int(s) for s in entry["shape"])
            offset = int(entry["offset"])
            nbytes = int(entry["nbytes"])
            dtype = entry["dtype"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ArchiveError(f"{path}: bad entry for {key!r}: {exc}") from None
        if dtype != "f32":
            raise ArchiveError(f"{path}: unsupported dtype {dtype!r} for {key!r}")
        expected = int(np.prod(shape, dtype=np.int64)) * 4 if shape else 4
        if nbytes != expected:
            raise ArchiveError(
                f"{path}: {key!r} declares {nbytes} bytes for shape {list(shape)}")
        if offset < 0 or offset + nbytes > len(payload):
            raise ArchiveError(
                f"{path}: payload-length mismatch for {key!r} "
                f"(needs bytes [{offset}, {offset + nbytes}), payload has {len(payload)})")
        tensors[key] = np.frombuffer(payload[offset:offset + nbytes],
                                     dtype="<f4").reshape(shape)

    meta = header.get("metadata", {})
    return WeightArchive(tensors, stage_id=str(meta.get("stage_id", "")),
                         backbone_prefix=str(meta.get("backbone_prefix",
                                                      BACKBONE_PREFIX_DEFAULT)))


def adapt_first_layer(w: np.ndarray, c_dst: int) -> np.ndarray:
    """Repartition a conv kernel's input channels: (out, c_src, kh, kw) ->
    (out, c_dst, kh, kw).

    Each output filter becomes its channel mean scaled by c_src/c_dst and
    replicated, so responses to channel-replicated inputs are preserved:
    summing (c_src/c_dst)*mean over c_dst channels equals summing the
    original kernel over c_src channels.
    """
    arr = np.asarray(w, dtype=np.float32)
    if arr.ndim != 4:
        raise TransferError(f"first-layer kernel must be 4-D, got shape {arr.shape}")
    if c_dst < 1:
        raise TransferError(f"target channel count must be >= 1, got {c_dst}")
    c_src = arr.shape[1]
    mean = arr.mean(axis=1, dtype=np.float64)
    scaled = (c_src / c_dst) * mean
    out = np.repeat(scaled[:, None, :, :], c_dst, axis=1)
    return out.astype(np.float32)


class TransferReport(NamedTuple):
    copied: tuple[str, ...]
    adapted: tuple[str, ...]
    skipped: tuple[str, ...]

    @property
    def counts(self) -> dict:
        return {"copied": len(self.copied), "adapted": len(self.adapted),
                "skipped": len(self.skipped)}


def _is_first_layer_mismatch(src: np.ndarray, dst: np.ndarray) -> bool:
    # Same 4-D kernel except for the input-channel dimension.
    return (src.ndim == 4 and dst.ndim == 4
            and src.shape[0] == dst.shape[0]
            and src.shape[2:] == dst.shape[2:]
            and src.shape[1] != dst.shape[1])


def transfer_weights(src: WeightArchive, dst_skeleton: WeightArchive,
                     mode: str,
                     backbone_prefix: str | None = None) -> tuple[WeightArchive, TransferReport]:
    """Initialize a destination skeleton from a source archive.

    backbone mode considers only keys under the backbone prefix;
    framework mode considers every key. Name matches with equal shapes
    are copied; 4-D kernels differing only in input channels are adapted;
    everything else keeps its skeleton value and is reported skipped.
    """
    if mode not in ("backbone", "framework"):
        raise TransferError(f"unknown transfer mode {mode!r}")
    prefix = backbone_prefix if backbone_prefix is not None else src.backbone_prefix

    def eligible(key: str) -> bool:
        return mode == "framework" or key.startswith(prefix)

    if not any(eligible(k) and k in dst_skeleton for k in src.keys()):
        raise TransferError(
            f"no overlap between source and destination keys in {mode} mode")

    out = {}
    copied = []
    adapted = []
    skipped = []
    for key in dst_skeleton.keys():
        dst_tensor = dst_skeleton[key]
        if eligible(key) and key in src:
            src_tensor = src[key]
            if src_tensor.shape == dst_tensor.shape:
                out[key] = src_tensor
                copied.append(key)
                continue
            if _is_first_layer_mismatch(src_tensor, dst_tensor):
                out[key] = adapt_first_layer(src_tensor, dst_tensor.shape[1])
                adapted.append(key)
                continue
        out[key] = dst_tensor
        skipped.append(key)

    result = WeightArchive(out, stage_id=dst_skeleton.stage_id,
                           backbone_prefix=prefix)
    return result, TransferReport(tuple(copied), tuple(adapted), tuple(skipped))
