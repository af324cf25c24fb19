"""Adapters from heterogeneous source-annotation formats.

Sources ship as COCO JSON, VOC-style XML (one file per image), or
plain-text files with normalized center-format boxes. Every adapter
emits the normalized dataset model with category names mapped onto the
six canonical classes and ids renumbered contiguously.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path

from PIL import Image

from ..errors import SchemaError, UnknownCategoryError
from .coco_io import from_coco_dict
from .model import (
    CANONICAL_CATEGORIES,
    AnnotatedDataset,
    ImageRecord,
    Instance,
)

INGEST_FORMATS = ("coco", "voc-xml", "plain-txt")

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def map_category(raw_name: str, mapping: dict[str, str] | None) -> str:
    """Resolve a source label to a canonical class name.

    The mapping table wins; unmapped labels pass through only when they
    are already canonical.
    """
    name = str(raw_name)
    if mapping and name in mapping:
        mapped = mapping[name]
        if mapped not in CANONICAL_CATEGORIES:
            raise UnknownCategoryError(
                f"mapping target {mapped!r} for {name!r} is not one of "
                f"{', '.join(CANONICAL_CATEGORIES)}")
        return mapped
    if name in CANONICAL_CATEGORIES:
        return name
    raise UnknownCategoryError(
        f"unknown category {name!r} with no mapping entry")


def _canonical_categories(names_present: set[str]) -> list[tuple[int, str]]:
    ordered = [n for n in CANONICAL_CATEGORIES if n in names_present]
    return [(i, n) for i, n in enumerate(ordered, start=1)]


def _assemble(images, per_image_boxes, source_name) -> AnnotatedDataset:
    """images: list of (file_name, width, height); boxes: list of
    (category name, bbox) per image, index-aligned."""
    names_present = {name for boxes in per_image_boxes for name, _ in boxes}
    categories = _canonical_categories(names_present)
    cat_id = {n: i for i, n in categories}

    recs = []
    annotations = []
    ann_id = 0
    for k, (file_name, width, height) in enumerate(images, start=1):
        recs.append(ImageRecord(k, file_name, width, height, source_name))
        for name, bbox in per_image_boxes[k - 1]:
            ann_id += 1
            x, y, w, h = bbox
            annotations.append(Instance(ann_id, k, cat_id[name],
                                        (x, y, w, h), w * h, 0))
    return AnnotatedDataset(tuple(recs), tuple(annotations), tuple(categories))


def _ingest_coco(root, mapping, source_name) -> AnnotatedDataset:
    path = Path(root)
    if path.is_dir():
        candidates = sorted(path.glob("*.json"))
        if len(candidates) != 1:
            raise SchemaError(
                f"{root}: expected exactly one .json file, found {len(candidates)}")
        path = candidates[0]
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc

    # Foreign files may use arbitrary ids; go through the strict reader
    # only after normalizing ids, names, and the source tag.
    raw = from_coco_dict(_renumber_coco(doc))
    name_by_old = {i: n for i, n in raw.categories}
    names_present = {map_category(name_by_old[a.category_id], mapping)
                     for a in raw.annotations}
    categories = _canonical_categories(names_present)
    cat_id = {n: i for i, n in categories}

    images = [ImageRecord(img.id, img.file_name, img.width, img.height,
                          source_name) for img in raw.images]
    annotations = [
        Instance(a.id, a.image_id,
                 cat_id[map_category(name_by_old[a.category_id], mapping)],
                 a.bbox, a.area, a.iscrowd)
        for a in raw.annotations
    ]
    return AnnotatedDataset(tuple(images), tuple(annotations), tuple(categories))


def _renumber_coco(doc: dict) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError("top level: expected a JSON object")
    images = doc.get("images")
    annotations = doc.get("annotations")
    categories = doc.get("categories")
    if not all(isinstance(s, list) for s in (images, annotations, categories)):
        raise SchemaError("images/annotations/categories arrays are required")

    img_map = {}
    new_images = []
    for k, rec in enumerate(sorted(
            (r for r in images if isinstance(r, dict)),
            key=lambda r: str(r.get("file_name", ""))), start=1):
        if "id" in rec:
            img_map[rec["id"]] = k
        new_images.append({**rec, "id": k})

    new_annotations = []
    n = 0
    for a in annotations:
        if not isinstance(a, dict):
            continue
        n += 1
        rec = {**a, "id": n,
               "image_id": img_map.get(a.get("image_id"), a.get("image_id"))}
        # Foreign areas may be mask-derived; box-only instances carry w*h.
        bbox = a.get("bbox")
        if a.get("iscrowd", 0) == 0 and isinstance(bbox, list) and len(bbox) == 4:
            try:
                rec["area"] = float(bbox[2]) * float(bbox[3])
            except (TypeError, ValueError):
                pass
        new_annotations.append(rec)
    return {"images": new_images, "annotations": new_annotations,
            "categories": categories}


def _xml_text(node, tag, path):
    child = node.find(tag)
    if child is None or child.text is None:
        raise SchemaError(f"{path}: missing <{tag}>")
    return child.text.strip()


def _ingest_voc(root, mapping, source_name) -> AnnotatedDataset:
    files = sorted(Path(root).rglob("*.xml"))
    if not files:
        raise SchemaError(f"{root}: no .xml annotation files found")

    images = []
    per_image_boxes = []
    for path in files:
        try:
            tree = ET.parse(path)
        except ET.ParseError as exc:
            raise SchemaError(f"{path}: malformed XML: {exc}") from exc
        node = tree.getroot()
        file_name = _xml_text(node, "filename", path)
        size = node.find("size")
        if size is None:
            raise SchemaError(f"{path}: missing <size>")
        width = int(_xml_text(size, "width", path))
        height = int(_xml_text(size, "height", path))

        boxes = []
        for obj in node.findall("object"):
            name = map_category(_xml_text(obj, "name", path), mapping)
            bnd = obj.find("bndbox")
            if bnd is None:
                raise SchemaError(f"{path}: <object> missing <bndbox>")
            xmin = float(_xml_text(bnd, "xmin", path))
            ymin = float(_xml_text(bnd, "ymin", path))
            xmax = float(_xml_text(bnd, "xmax", path))
            ymax = float(_xml_text(bnd, "ymax", path))
            if xmax <= xmin or ymax <= ymin:
                raise SchemaError(
                    f"{path}: degenerate box ({xmin}, {ymin}, {xmax}, {ymax})")
            boxes.append((name, (xmin, ymin, xmax - xmin, ymax - ymin)))
        images.append((file_name, width, height))
        per_image_boxes.append(boxes)
    return _assemble(images, per_image_boxes, source_name)


def _find_image(images_dir: Path, stem: str):
    for suffix in _IMAGE_SUFFIXES:
        candidate = images_dir / f"{stem}{suffix}"
        if candidate.exists():
            return candidate
    return None


def _ingest_txt(root, mapping, source_name) -> AnnotatedDataset:
    """Layout: root/images/*.png + root/labels/<stem>.txt, each line
    'cls cx cy w h' with center coordinates normalized to [0, 1]."""
    root = Path(root)
    labels_dir = root / "labels"
    images_dir = root / "images"
    if not labels_dir.is_dir() or not images_dir.is_dir():
        raise SchemaError(f"{root}: expected images/ and labels/ subdirectories")
    files = sorted(labels_dir.glob("*.txt"))
    if not files:
        raise SchemaError(f"{labels_dir}: no .txt label files found")

    images = []
    per_image_boxes = []
    for path in files:
        image_path = _find_image(images_dir, path.stem)
        if image_path is None:
            raise SchemaError(f"{path}: no matching image for stem {path.stem!r}")
        with Image.open(image_path) as img:
            width, height = img.size

        boxes = []
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(),
                                      start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise SchemaError(
                    f"{path}:{lineno}: expected 'cls cx cy w h', got {line!r}")
            try:
                cx, cy, w, h = (float(v) for v in parts[1:])
            except ValueError:
                raise SchemaError(
                    f"{path}:{lineno}: non-numeric coordinates in {line!r}") from None
            name = map_category(parts[0], mapping)
            bw = w * width
            bh = h * height
            x = cx * width - bw / 2.0
            y = cy * height - bh / 2.0
            if bw <= 0 or bh <= 0 or x < 0 or y < 0 \
                    or x + bw > width or y + bh > height:
                raise SchemaError(
                    f"{path}:{lineno}: box outside the {width}x{height} image")
            boxes.append((name, (x, y, bw, bh)))
        images.append((image_path.name, width, height))
        per_image_boxes.append(boxes)
    return _assemble(images, per_image_boxes, source_name)


def ingest(source_format: str, root, category_map: dict[str, str] | None = None,
           source_name: str | None = None) -> AnnotatedDataset:
    """Read a source dataset in one of the supported annotation formats."""
    if source_name is None:
        source_name = Path(root).stem
    if source_format == "coco":
        return _ingest_coco(root, category_map, source_name)
    if source_format == "voc-xml":
        return _ingest_voc(root, category_map, source_name)
    if source_format == "plain-txt":
        return _ingest_txt(root, category_map, source_name)
    raise SchemaError(
        f"unknown ingest format {source_format!r}; expected one of {INGEST_FORMATS}")
