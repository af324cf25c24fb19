"""COCO emission and strict reading with JSON-path diagnostics."""

import json

import pytest

from msfa.dataset import (
    AnnotatedDataset,
    ImageRecord,
    box_instance,
    from_coco,
    from_coco_dict,
    to_coco,
)
from msfa.errors import SchemaError
from msfa.stats import dataset_stats


def synthetic_dataset(n_images=50, rng_seed=7) -> AnnotatedDataset:
    import random
    rnd = random.Random(rng_seed)
    images = []
    annotations = []
    k = 1
    for i in range(1, n_images + 1):
        w, h = rnd.randint(64, 512), rnd.randint(64, 512)
        images.append(ImageRecord(i, f"img{i:04d}.png", w, h, "synth"))
        for _ in range(rnd.randint(0, 4)):
            bw = rnd.randint(2, max(2, w // 4))
            bh = rnd.randint(2, max(2, h // 4))
            x = rnd.randint(0, w - bw)
            y = rnd.randint(0, h - bh)
            annotations.append(
                box_instance(k, i, rnd.randint(1, 6), (x, y, bw, bh)))
            k += 1
    return AnnotatedDataset(tuple(images), tuple(annotations))


class TestToCoco:
    def test_schema_echo(self):
        d = AnnotatedDataset(
            (ImageRecord(1, "a.png", 100, 100, "s"),),
            (box_instance(1, 1, 1, (10, 20, 30, 40)),))
        doc = to_coco(d)
        assert doc["annotations"][0]["bbox"] == [10.0, 20.0, 30.0, 40.0]
        assert doc["annotations"][0]["area"] == 1200.0
        assert doc["images"][0]["file_name"] == "a.png"
        assert {c["name"] for c in doc["categories"]} >= {"ship", "tank"}

    def test_writes_deterministic_file(self, tmp_path):
        d = synthetic_dataset(5)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        to_coco(d, p1)
        to_coco(d, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert json.loads(p1.read_text())["images"]


class TestRoundTrip:
    def test_preserves_everything(self, tmp_path):
        d = synthetic_dataset(50)
        path = tmp_path / "coco.json"
        to_coco(d, path)
        back = from_coco(path)
        assert back.images == d.images
        assert back.annotations == d.annotations
        assert back.categories == d.categories

    def test_stats_identical_after_round_trip(self, tmp_path):
        d = synthetic_dataset(50)
        path = tmp_path / "coco.json"
        to_coco(d, path)
        assert dataset_stats(from_coco(path)) == dataset_stats(d)


class TestStrictReading:
    def _valid_doc(self):
        return to_coco(synthetic_dataset(3))

    def test_missing_image_reference_names_the_annotation(self):
        doc = self._valid_doc()
        doc["annotations"][1]["image_id"] = 999
        with pytest.raises(SchemaError, match=r"annotations\[1\]\.image_id: references missing image 999"):
            from_coco_dict(doc)

    def test_missing_category_reference(self):
        doc = self._valid_doc()
        doc["annotations"][0]["category_id"] = 42
        with pytest.raises(SchemaError, match=r"annotations\[0\]\.category_id"):
            from_coco_dict(doc)

    def test_all_violations_reported_together(self):
        doc = self._valid_doc()
        doc["annotations"][0]["image_id"] = 999
        doc["annotations"][1]["bbox"] = [1, 2, 3]
        doc["images"][0].pop("width")
        try:
            from_coco_dict(doc)
        except SchemaError as exc:
            msg = str(exc)
            assert "annotations[0].image_id" in msg
            assert "annotations[1].bbox" in msg
            assert "images[0].width" in msg
        else:
            pytest.fail("expected SchemaError")

    def test_wrong_type_reported_with_path(self):
        doc = self._valid_doc()
        doc["images"][2]["id"] = "seven"
        with pytest.raises(SchemaError, match=r"images\[2\]\.id: expected int"):
            from_coco_dict(doc)

    def test_top_level_sections_required(self):
        with pytest.raises(SchemaError, match="annotations: expected an array"):
            from_coco_dict({"images": [], "categories": []})

    def test_invalid_json_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        with pytest.raises(SchemaError, match="not valid JSON"):
            from_coco(bad)

    def test_non_contiguous_ids_rejected(self):
        doc = {
            "images": [
                {"id": 5, "file_name": "a.png", "width": 10, "height": 10}],
            "annotations": [],
            "categories": [{"id": 1, "name": "ship"}],
        }
        with pytest.raises(SchemaError, match="contiguous"):
            from_coco_dict(doc)
