"""Atomic file writes and deterministic JSON serialization.

Every artifact writer in the package goes through these helpers so that
interrupted runs never leave half-written files and identical inputs
always produce byte-identical outputs.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path


def atomic_write_bytes(path, data: bytes) -> None:
    """Write bytes to path via a same-directory temp file and rename."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def dumps_deterministic(obj, indent: int | None = None) -> str:
    """JSON text that is identical for identical content on any platform."""
    return json.dumps(obj, sort_keys=True, indent=indent,
                      separators=(",", ": ") if indent else (",", ":"),
                      ensure_ascii=False)


def write_json(path, obj, indent: int | None = 2) -> None:
    atomic_write_text(path, dumps_deterministic(obj, indent=indent) + "\n")
