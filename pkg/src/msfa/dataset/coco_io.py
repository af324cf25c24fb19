"""COCO JSON emission and strict reading.

Writing is deterministic (sorted keys, fixed float formatting via the
standard JSON encoder) so identical datasets give byte-identical files.
Reading validates the schema and reports every violation with its JSON
path instead of failing on the first.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import SchemaError
from ..fileio import write_json
from .model import AnnotatedDataset, ImageRecord, Instance


def to_coco(d: AnnotatedDataset, path=None) -> dict:
    """COCO dictionary for d; written to path when given."""
    doc = {
        "images": [
            {
                "id": img.id,
                "file_name": img.file_name,
                "width": img.width,
                "height": img.height,
                "source_dataset": img.source_dataset,
            }
            for img in d.images
        ],
        "annotations": [
            {
                "id": a.id,
                "image_id": a.image_id,
                "category_id": a.category_id,
                "bbox": list(a.bbox),
                "area": a.area,
                "iscrowd": a.iscrowd,
            }
            for a in d.annotations
        ],
        "categories": [{"id": i, "name": n} for i, n in d.categories],
    }
    if path is not None:
        write_json(path, doc)
    return doc


def _require(container, key, kinds, path, violations):
    value = container.get(key)
    if not isinstance(value, kinds) or isinstance(value, bool):
        names = kinds.__name__ if isinstance(kinds, type) else "/".join(
            k.__name__ for k in kinds)
        violations.append(f"{path}.{key}: expected {names}, got {value!r}")
        return None
    return value


def from_coco_dict(doc: dict) -> AnnotatedDataset:
    """Validate a parsed COCO document and build the dataset model."""
    violations: list[str] = []
    if not isinstance(doc, dict):
        raise SchemaError("top level: expected a JSON object")
    for section in ("images", "categories", "annotations"):
        if not isinstance(doc.get(section), list):
            violations.append(f"{section}: expected an array")
    if violations:
        raise SchemaError("; ".join(violations))

    categories = []
    for k, c in enumerate(doc["categories"]):
        path = f"categories[{k}]"
        if not isinstance(c, dict):
            violations.append(f"{path}: expected an object")
            continue
        cid = _require(c, "id", int, path, violations)
        name = _require(c, "name", str, path, violations)
        if cid is not None and name is not None:
            categories.append((cid, name))

    images = []
    image_ids = set()
    for k, rec in enumerate(doc["images"]):
        path = f"images[{k}]"
        if not isinstance(rec, dict):
            violations.append(f"{path}: expected an object")
            continue
        iid = _require(rec, "id", int, path, violations)
        file_name = _require(rec, "file_name", str, path, violations)
        width = _require(rec, "width", int, path, violations)
        height = _require(rec, "height", int, path, violations)
        if None in (iid, file_name, width, height):
            continue
        source = rec.get("source_dataset", "")
        try:
            images.append(ImageRecord(iid, file_name, width, height, str(source)))
            image_ids.add(iid)
        except SchemaError as exc:
            violations.append(f"{path}: {exc}")

    category_ids = {i for i, _ in categories}
    annotations = []
    for k, a in enumerate(doc["annotations"]):
        path = f"annotations[{k}]"
        if not isinstance(a, dict):
            violations.append(f"{path}: expected an object")
            continue
        aid = _require(a, "id", int, path, violations)
        image_id = _require(a, "image_id", int, path, violations)
        category_id = _require(a, "category_id", int, path, violations)
        bbox = a.get("bbox")
        area = _require(a, "area", (int, float), path, violations)
        iscrowd = a.get("iscrowd", 0)
        if not (isinstance(bbox, list) and len(bbox) == 4
                and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                        for v in bbox)):
            violations.append(f"{path}.bbox: expected [x, y, w, h] numbers, got {bbox!r}")
            continue
        if None in (aid, image_id, category_id, area):
            continue
        if image_id not in image_ids:
            violations.append(f"{path}.image_id: references missing image {image_id}")
            continue
        if category_id not in category_ids:
            violations.append(
                f"{path}.category_id: references missing category {category_id}")
            continue
        try:
            annotations.append(Instance(aid, image_id, category_id,
                                        tuple(float(v) for v in bbox),
                                        float(area), int(iscrowd)))
        except SchemaError as exc:
            violations.append(f"{path}: {exc}")

    if violations:
        raise SchemaError("; ".join(violations))
    try:
        return AnnotatedDataset(tuple(images), tuple(annotations), tuple(categories))
    except SchemaError as exc:
        raise SchemaError(str(exc)) from None


def from_coco(path) -> AnnotatedDataset:
    raw = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    return from_coco_dict(doc)
