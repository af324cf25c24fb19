"""Descriptor parameter blocks, validated at construction.

Defaults follow common SAR practice: percentile Canny thresholds adapt to
dynamic range, HOG uses the standard 8px/9-bin/2x2-block configuration,
and the scattering transform keeps 2^J decimation small (J=2) so 256px
chips retain 64px spatial maps for small objects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from ..errors import ParameterError, UnknownDescriptorError

DESCRIPTOR_NAMES = ("hog", "canny", "haar", "wst", "gre")


@dataclass(frozen=True)
class HogParams:
    cell: int = 8
    bins: int = 9
    block: int = 2
    norm_eps: float = 1e-12

    def __post_init__(self):
        if self.cell < 2:
            raise ParameterError(f"hog cell must be >= 2, got {self.cell}")
        if self.bins < 2:
            raise ParameterError(f"hog bins must be >= 2, got {self.bins}")
        if self.block < 1:
            raise ParameterError(f"hog block must be >= 1, got {self.block}")
        if self.norm_eps <= 0:
            raise ParameterError("hog norm_eps must be positive")


@dataclass(frozen=True)
class CannyParams:
    sigma: float = 1.4
    low_frac: float = 0.5
    high_percentile: float = 90.0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ParameterError(f"canny sigma must be > 0, got {self.sigma}")
        if not (0.0 < self.low_frac <= 1.0):
            raise ParameterError(f"canny low_frac must be in (0, 1], got {self.low_frac}")
        if not (0.0 < self.high_percentile < 100.0):
            raise ParameterError(
                f"canny high_percentile must be in (0, 100), got {self.high_percentile}")


@dataclass(frozen=True)
class HaarParams:
    window: int = 16

    def __post_init__(self):
        if self.window < 4 or self.window % 2 != 0:
            raise ParameterError(f"haar window must be even and >= 4, got {self.window}")


@dataclass(frozen=True)
class WstParams:
    J: int = 2
    L: int = 8

    def __post_init__(self):
        if self.J < 1:
            raise ParameterError(f"wst J must be >= 1, got {self.J}")
        if self.L < 1:
            raise ParameterError(f"wst L must be >= 1, got {self.L}")


@dataclass(frozen=True)
class GreParams:
    alpha: float = 2.0
    eps: float = 1e-6

    def __post_init__(self):
        if self.alpha < 1.0:
            raise ParameterError(f"gre alpha must be >= 1, got {self.alpha}")
        if self.eps < 0:
            raise ParameterError(f"gre eps must be >= 0, got {self.eps}")


PARAM_TYPES = {
    "hog": HogParams,
    "canny": CannyParams,
    "haar": HaarParams,
    "wst": WstParams,
    "gre": GreParams,
}


def default_params(name: str):
    key = name.lower()
    if key not in PARAM_TYPES:
        raise UnknownDescriptorError(
            f"unknown descriptor {name!r}; supported: {', '.join(DESCRIPTOR_NAMES)}")
    return PARAM_TYPES[key]()


def params_from_dict(name: str, block: dict):
    """Build a validated parameter block from plain key/value pairs."""
    cls = PARAM_TYPES.get(name.lower())
    if cls is None:
        raise UnknownDescriptorError(
            f"unknown descriptor {name!r}; supported: {', '.join(DESCRIPTOR_NAMES)}")
    known = {f.name for f in fields(cls)}
    bad = sorted(set(block) - known)
    if bad:
        raise ParameterError(f"unknown {name} parameter(s): {', '.join(bad)}")
    return cls(**block)


def load_descriptor_config(path) -> dict:
    """Read a JSON config mapping descriptor names to parameter blocks.

    Schema: {"wst": {"J": 2, "L": 8}, "hog": {"cell": 8}, ...}; any
    descriptor absent from the file keeps its defaults.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ParameterError("descriptor config must be a JSON object")
    out = {}
    for name, block in raw.items():
        if not isinstance(block, dict):
            raise ParameterError(f"config entry {name!r} must be an object of parameters")
        out[name.lower()] = params_from_dict(name, block)
    return out
