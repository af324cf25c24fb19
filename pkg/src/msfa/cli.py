"""Command-line entry point.

One executable, one subcommand per pipeline step. Progress and warnings
go to standard error; machine-readable results go to standard output or
files. All file outputs are written atomically, and batch subcommands
produce byte-identical artifacts for any worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import augment as augment_mod
from . import stats as stats_mod
from .dataset import (
    AnnotatedDataset,
    INGEST_FORMATS,
    SliceSpec,
    from_coco,
    ingest,
    merge,
    multi_scale_slice,
    patch_file_name,
    slice_image,
    split_dataset,
    to_coco,
)
from .dataset.model import ImageRecord, Instance
from .errors import MsfaError, ParameterError
from .fileio import dumps_deterministic, write_json
from .filters import DESCRIPTOR_NAMES, apply_descriptor, load_descriptor_config
from .raster import load_grayscale, normalize, save_grayscale
from .stageplan import StagePlan, emit_stage_manifests, plan_from_dicts, validate_plan
from .weights import read_archive, transfer_weights, write_archive

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(obj) -> None:
    print(dumps_deterministic(obj, indent=2))


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return max(1, args.workers)
    return max(1, int(os.environ.get("MSFA_WORKERS", "1")))


def _image_files(root: Path) -> list[Path]:
    if root.is_file():
        return [root]
    files = [p for p in sorted(root.rglob("*"))
             if p.suffix.lower() in _IMAGE_SUFFIXES]
    if not files:
        raise ParameterError(f"no image files under {root}")
    return files


def _parse_map(path) -> dict | None:
    if path is None:
        return None
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or not all(
            isinstance(v, str) for v in doc.values()):
        raise ParameterError(f"{path}: category map must be a string-to-string object")
    return {str(k): v for k, v in doc.items()}


def _descriptor_params(path) -> dict:
    if path is None:
        return {}
    return load_descriptor_config(path)


# --- subcommands ---------------------------------------------------------


def _cmd_ingest(args) -> int:
    d = ingest(args.format, args.root, _parse_map(args.category_map),
               args.source_name)
    to_coco(d, args.out)
    _log(f"ingested {d.num_images} images, {d.num_instances} instances")
    _emit({"images": d.num_images, "instances": d.num_instances,
           "out": str(args.out)})
    return 0


def _cmd_split(args) -> int:
    ratios = tuple(float(v) for v in args.ratios.split(","))
    if len(ratios) != 3:
        raise ParameterError(f"--ratios needs three comma-separated values, got {args.ratios}")
    d = from_coco(args.input)
    train, val, test = split_dataset(d, ratios, args.seed)
    out_dir = Path(args.out_dir)
    result = {}
    for name, part in (("train", train), ("val", val), ("test", test)):
        to_coco(part, out_dir / f"{name}.json")
        result[name] = {"images": part.num_images, "instances": part.num_instances}
    _emit(result)
    return 0


def _slice_one(task):
    path, image_record, instances, spec = task
    r = load_grayscale(path)
    if (r.width, r.height) != (image_record.width, image_record.height):
        raise ParameterError(
            f"{path}: file is {r.width}x{r.height}, manifest says "
            f"{image_record.width}x{image_record.height}")
    if len(spec.scales) == 1 and spec.scales[0] == 1.0:
        patches, report = slice_image(r, instances, spec)
    else:
        patches, report = multi_scale_slice(r, instances, spec)
    return image_record, patches, report


def _cmd_slice(args) -> int:
    spec = SliceSpec(patch=args.patch, overlap=args.overlap,
                     keep_fraction=args.keep_fraction, min_area=args.min_area,
                     scales=tuple(float(s) for s in args.scales.split(",")))
    images_root = Path(args.input)
    out_dir = Path(args.out)

    if args.ann:
        d = from_coco(args.ann)
        rows = [(img, d.annotations_for(img.id)) for img in d.images]
        categories = d.categories
    else:
        files = _image_files(images_root)
        rows = []
        for k, p in enumerate(files, start=1):
            r = load_grayscale(p)
            rows.append((ImageRecord(k, str(p.relative_to(images_root)) if p != images_root else p.name,
                                     r.width, r.height, ""), ()))
        categories = ()

    rows.sort(key=lambda row: (row[0].source_dataset, row[0].file_name))
    tasks = [(images_root / img.file_name if images_root.is_dir() else images_root,
              img, instances, spec) for img, instances in rows]

    with ThreadPoolExecutor(max_workers=_workers(args)) as pool:
        results = list(pool.map(_slice_one, tasks))

    out_images = []
    out_annotations = []
    total = kept = dropped = 0
    next_image_id = 0
    next_ann_id = 0
    for image_record, patches, report in results:
        total += report.total
        kept += report.kept
        dropped += report.dropped
        stem = Path(image_record.file_name).stem
        for patch in patches:
            next_image_id += 1
            x, y, w, h = patch.window
            name = patch_file_name(stem, patch.scale, x, y)
            if patch.raster is not None:
                save_grayscale(patch.raster, out_dir / "images" / name)
            out_images.append(ImageRecord(next_image_id, name, w, h,
                                          image_record.source_dataset))
            for inst in patch.instances:
                next_ann_id += 1
                out_annotations.append(Instance(next_ann_id, next_image_id,
                                                inst.category_id, inst.bbox,
                                                inst.area, inst.iscrowd))
    sliced = AnnotatedDataset(tuple(out_images), tuple(out_annotations),
                              categories)
    to_coco(sliced, out_dir / "patches.json")
    _log(f"sliced {len(results)} images into {sliced.num_images} patches")
    _emit({"patches": sliced.num_images, "instances_total": total,
           "instances_kept": kept, "instances_dropped": dropped})
    return 0


def _cmd_merge(args) -> int:
    parts = [from_coco(p) for p in args.inputs]
    merged = merge(parts)
    to_coco(merged, args.out)
    _emit({"images": merged.num_images, "instances": merged.num_instances,
           "out": str(args.out)})
    return 0


def _cmd_stats(args) -> int:
    d = from_coco(args.input)
    report = stats_mod.dataset_stats(d)
    if args.categories:
        report["categories"] = stats_mod.category_stats(d)
    if args.json:
        write_json(args.json, report)

    name_width = max([len(s) for s in report["sources"]] + [7])
    lines = [f"{'source':<{name_width}}  {'images':>8}  {'instances':>10}  {'ins/img':>8}"]
    for source, row in report["sources"].items():
        lines.append(f"{source or '-':<{name_width}}  {row['images']:>8}  "
                     f"{row['instances']:>10}  {row['ins_per_img']:>8.2f}")
    lines.append(f"{'total':<{name_width}}  {report['images']:>8}  "
                 f"{report['instances']:>10}  {report['ins_per_img']:>8.2f}")
    print("\n".join(lines))
    return 0


def _cmd_filters(args) -> int:
    params = _descriptor_params(args.params).get(args.name)
    files = _image_files(Path(args.input))
    out_dir = Path(args.out)

    def run(path: Path):
        r = normalize(load_grayscale(path))
        stack = apply_descriptor(args.name, r, params)
        if args.action == "dump":
            target = out_dir / f"{path.stem}__{args.name}.tiff"
            _write_stack_tiff(stack, target)
        else:
            target = out_dir / f"{path.stem}__{args.name}.msfa"
            _write_stack(stack, target)
        return str(target)

    with ThreadPoolExecutor(max_workers=_workers(args)) as pool:
        written = list(pool.map(run, files))
    _emit({"descriptor": args.name, "action": args.action, "files": written})
    return 0


def _write_stack_tiff(stack, path) -> None:
    """One float32 TIFF page per channel, for visual inspection."""
    import io

    from PIL import Image

    from .fileio import atomic_write_bytes

    pages = [Image.fromarray(ch, mode="F") for ch in stack.values]
    buf = io.BytesIO()
    pages[0].save(buf, format="TIFF", save_all=True, append_images=pages[1:])
    atomic_write_bytes(path, buf.getvalue())


def _write_stack(stack, path) -> None:
    import struct

    from .fileio import atomic_write_bytes

    header = {
        "dtype": "f32",
        "labels": list(stack.labels),
        "layout": "chw",
        "shape": list(stack.values.shape),
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = stack.values.astype("<f4", copy=False).tobytes(order="C")
    atomic_write_bytes(path, struct.pack("<Q", len(blob)) + blob + payload)


def _cmd_augment(args) -> int:
    names = [n for n in args.descriptors.split(",") if n] if args.descriptors else []
    params = _descriptor_params(args.params)
    files = _image_files(Path(args.input))
    out_dir = Path(args.out)

    def run(path: Path):
        r = normalize(load_grayscale(path))
        composed = augment_mod.compose(r, names, params,
                                       triplicate_single=args.triplicate)
        target = out_dir / f"{path.stem}.msfa"
        augment_mod.export_tensor(composed, args.layout, target)
        return str(target)

    with ThreadPoolExecutor(max_workers=_workers(args)) as pool:
        written = list(pool.map(run, files))
    _log(f"augmented {len(written)} images with [{args.descriptors}]")
    _emit({"descriptors": names, "layout": args.layout, "files": written})
    return 0


def _cmd_pcc(args) -> int:
    spaces = (list(stats_mod.SPACES) if args.space == "all"
              else [s for s in args.space.split(",") if s])
    for space in spaces:
        if space not in stats_mod.SPACES:
            raise ParameterError(
                f"unknown space {space!r}; expected one of {stats_mod.SPACES}")
    corpus_a = _image_files(Path(args.corpus_a))
    corpus_b = _image_files(Path(args.corpus_b))
    params = _descriptor_params(args.params)

    def one_space(space):
        pm = None if space == stats_mod.PIXEL_SPACE else params.get(space)
        ha = stats_mod.corpus_histogram(corpus_a, space, args.bins, pm)
        hb = stats_mod.corpus_histogram(corpus_b, space, args.bins, pm)
        return space, stats_mod.pcc(ha, hb)

    with ThreadPoolExecutor(max_workers=_workers(args)) as pool:
        values = dict(pool.map(one_space, spaces))

    report = {
        "corpora": {"a": {"root": str(args.corpus_a), "images": len(corpus_a)},
                    "b": {"root": str(args.corpus_b), "images": len(corpus_b)}},
        "bins": args.bins,
        "pcc": {space: values[space] for space in spaces},
    }
    if args.out:
        write_json(args.out, report)
    if args.chart:
        _write_chart(report["pcc"], args.chart)
    _emit(report)
    return 0


def _write_chart(values: dict, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    spaces = list(values)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(spaces)), [values[s] for s in spaces], color="#4878d0")
    ax.set_xticks(range(len(spaces)))
    ax.set_xticklabels(spaces)
    ax.set_ylabel("PCC")
    ax.set_ylim(-1.0, 1.0)
    ax.axhline(0.0, color="black", linewidth=0.8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _load_plan(path) -> StagePlan:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    stages = doc["stages"] if isinstance(doc, dict) and "stages" in doc else doc
    if not isinstance(stages, list):
        raise ParameterError(f"{path}: expected a list of stages")
    return plan_from_dicts(stages)


def _cmd_plan(args) -> int:
    plan = _load_plan(args.plan)
    if args.action == "validate":
        report = validate_plan(plan)
        _emit({"ok": report.ok, "violations": list(report.violations)})
        return 0 if report.ok else 1
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ParameterError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            overrides[key] = json.loads(value)
        except json.JSONDecodeError:
            overrides[key] = value
    manifests = emit_stage_manifests(plan, args.out_dir, overrides)
    _emit({"stages": manifests})
    return 0


def _cmd_weights(args) -> int:
    src = read_archive(args.src)
    dst = read_archive(args.dst)
    result, report = transfer_weights(src, dst, args.mode, args.backbone_prefix)
    write_archive(result, args.out)
    _emit({"mode": args.mode, "out": str(args.out), **report.counts,
           "adapted_keys": list(report.adapted)})
    return 0


# --- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msfa",
        description="SAR detection dataset engineering and filter augmentation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a source dataset into COCO form")
    p.add_argument("--format", required=True, choices=INGEST_FORMATS)
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category-map", default=None,
                   help="JSON object mapping source labels to canonical names")
    p.add_argument("--source-name", default=None)
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("convert", help="alias of ingest (into COCO form)")
    p.add_argument("--format", required=True, choices=INGEST_FORMATS)
    p.add_argument("--root", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--category-map", default=None)
    p.add_argument("--source-name", default=None)
    p.set_defaults(fn=_cmd_ingest)

    p = sub.add_parser("split", help="seeded train/val/test partition")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_split)

    p = sub.add_parser("slice", help="cut images into overlapping patches")
    p.add_argument("--in", dest="input", required=True, help="images dir or file")
    p.add_argument("--ann", default=None, help="COCO annotations for the images")
    p.add_argument("--out", required=True)
    p.add_argument("--patch", type=int, default=512)
    p.add_argument("--overlap", type=int, default=200)
    p.add_argument("--scales", default="1.0")
    p.add_argument("--keep-fraction", type=float, default=0.6)
    p.add_argument("--min-area", type=float, default=4.0)
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(fn=_cmd_slice)

    p = sub.add_parser("merge", help="merge COCO datasets into one")
    p.add_argument("--out", required=True)
    p.add_argument("inputs", nargs="+")
    p.set_defaults(fn=_cmd_merge)

    p = sub.add_parser("stats", help="image/instance statistics table")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--json", default=None, help="also write the JSON report here")
    p.add_argument("--categories", action="store_true",
                   help="include per-category shares and mean areas")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("filters", help="run one descriptor over images")
    p.add_argument("action", nargs="?", choices=("run", "dump"), default="run",
                   help="run writes tensor files; dump writes multi-page TIFFs")
    p.add_argument("--name", required=True, choices=DESCRIPTOR_NAMES)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--params", default=None, help="descriptor parameter JSON")
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(fn=_cmd_filters)

    p = sub.add_parser("augment", help="compose filter-augmented input tensors")
    p.add_argument("--descriptors", default="",
                   help="comma-separated names; empty replicates the image")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--layout", default="chw", choices=("chw", "hwc"))
    p.add_argument("--params", default=None)
    p.add_argument("--triplicate", action="store_true",
                   help="single descriptor as [image, M, M] three channels")
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(fn=_cmd_augment)

    p = sub.add_parser("pcc", help="corpus histogram correlation per space")
    p.add_argument("corpus_a")
    p.add_argument("corpus_b")
    p.add_argument("--space", default="all",
                   help="comma-separated spaces or 'all'")
    p.add_argument("--bins", type=int, default=stats_mod.BINS_DEFAULT)
    p.add_argument("--params", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--chart", default=None, help="write a bar chart PNG here")
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(fn=_cmd_pcc)

    p = sub.add_parser("plan", help="validate a stage plan or emit manifests")
    p.add_argument("action", choices=("validate", "emit"))
    p.add_argument("plan")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--set", action="append", default=[],
                   metavar="KEY=VALUE", help="manifest overrides")
    p.set_defaults(fn=_cmd_plan)

    p = sub.add_parser("weights", help="transfer weights between archives")
    p.add_argument("action", choices=("transfer",))
    p.add_argument("--src", required=True)
    p.add_argument("--dst", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", required=True, choices=("backbone", "framework"))
    p.add_argument("--backbone-prefix", default=None)
    p.set_defaults(fn=_cmd_weights)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MsfaError as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
