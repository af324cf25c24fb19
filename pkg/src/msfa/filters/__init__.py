"""Handcrafted feature descriptors and the pooled-channel reduction.

Each descriptor maps a normalized single-channel raster to a FeatureStack.
`apply_descriptor` dispatches by name; `descriptor_channel` additionally
pools the stack to one channel at the raster's resolution, which is the
form consumed by input augmentation.
"""

from __future__ import annotations

from typing import Callable

from ..errors import UnknownDescriptorError
from ..raster import Raster
from .canny import canny
from .gre import gre
from .haar import haar_map
from .hog import hog_map
from .params import (
    DESCRIPTOR_NAMES,
    CannyParams,
    GreParams,
    HaarParams,
    HogParams,
    WstParams,
    default_params,
    load_descriptor_config,
    params_from_dict,
)
from .stack import FeatureStack, pool_to_channel
from .wst import filter_bank, wst, wst_channel_count

_DISPATCH: dict[str, Callable] = {
    "hog": hog_map,
    "canny": canny,
    "haar": haar_map,
    "wst": wst,
    "gre": gre,
}


def apply_descriptor(name: str, r: Raster, params=None) -> FeatureStack:
    """Run one descriptor on a normalized raster.

    `params` defaults to the descriptor's standard parameter set; passing a
    params object of the wrong type is rejected by the descriptor itself.
    """
    try:
        fn = _DISPATCH[name]
    except KeyError:
        raise UnknownDescriptorError(
            f"unknown descriptor {name!r}; expected one of {', '.join(DESCRIPTOR_NAMES)}"
        ) from None
    return fn(r, params)


def descriptor_channel(name: str, r: Raster, params=None) -> FeatureStack:
    """Descriptor output pooled to a single [0, 1] channel at input size."""
    stack = apply_descriptor(name, r, params)
    return pool_to_channel(stack, r.width, r.height)


__all__ = [
    "DESCRIPTOR_NAMES",
    "CannyParams",
    "GreParams",
    "HaarParams",
    "HogParams",
    "WstParams",
    "FeatureStack",
    "apply_descriptor",
    "descriptor_channel",
    "default_params",
    "filter_bank",
    "load_descriptor_config",
    "params_from_dict",
    "pool_to_channel",
    "wst",
    "wst_channel_count",
]
