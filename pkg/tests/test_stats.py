"""Dataset statistics, corpus histograms, and feature-space correlation."""

from __future__ import annotations

import json

import numpy as np
import pytest
from PIL import Image

from conftest import make_raster, natural_image, random_raster
from msfa.dataset.model import AnnotatedDataset, ImageRecord, box_instance
from msfa.errors import EmptyDatasetError, HistogramError, ParameterError
from msfa.stats import (
    BINS_DEFAULT,
    SPACES,
    CorpusHistogram,
    bin_values,
    category_stats,
    corpus_histogram,
    dataset_stats,
    image_histogram,
    ins_per_img,
    pcc,
    pcc_report,
    speckle,
)

# Published image/instance totals for ten public SAR detection source sets
# and their combined corpus, with the instances-per-image ratio each set
# reports at two decimals.
SOURCE_COUNTS = [
    ("AIR_SARShip_1", 501, 1_058, 2.11),
    ("AIR_SARShip_2", 300, 2_040, 6.80),
    ("HRSID", 5_604, 16_969, 3.03),
    ("MSAR", 30_158, 65_202, 2.16),
    ("SADD", 883, 7_835, 8.87),
    ("SAR-AIRcraft", 18_888, 38_475, 2.04),
    ("ShipDataset", 39_729, 50_885, 1.28),
    ("SSDD", 1_160, 2_587, 2.23),
    ("OGSOD", 18_331, 48_589, 2.65),
    ("SIVED", 1_044, 12_013, 11.51),
    ("combined", 116_598, 245_653, 2.11),
]


class TestInsPerImg:
    @pytest.mark.parametrize("name,images,instances,expected",
                             [(n, im, ins, r) for n, im, ins, r in SOURCE_COUNTS])
    def test_published_source_ratios(self, name, images, instances, expected):
        assert ins_per_img(instances, images) == expected

    def test_rounds_half_up_not_half_even(self):
        # 1/8 = 0.125 exactly; half-up gives 0.13 where half-even gives 0.12.
        assert ins_per_img(1, 8) == 0.13

    def test_exact_decimal_tie_survives(self):
        # 107/40 = 2.675 exactly as a rational; binary float arithmetic
        # would land just below the tie and round down to 2.67.
        assert ins_per_img(107, 40) == 2.68

    def test_no_images_is_an_error(self):
        with pytest.raises(EmptyDatasetError):
            ins_per_img(5, 0)

    def test_zero_instances_is_zero(self):
        assert ins_per_img(0, 10) == 0.0


def _multi_source_dataset():
    images = (
        ImageRecord(1, "b1.png", 64, 64, source_dataset="beta"),
        ImageRecord(2, "b2.png", 64, 64, source_dataset="beta"),
        ImageRecord(3, "a1.png", 64, 64, source_dataset="alpha"),
    )
    annotations = (
        box_instance(1, 1, 1, (0, 0, 10, 10)),
        box_instance(2, 1, 1, (20, 20, 5, 5)),
        box_instance(3, 2, 1, (1, 1, 8, 4)),
        box_instance(4, 3, 1, (0, 0, 2, 2)),
        box_instance(5, 3, 1, (10, 10, 3, 3)),
        box_instance(6, 3, 1, (30, 30, 4, 4)),
    )
    return AnnotatedDataset(images, annotations)


class TestDatasetStats:
    def test_counts_and_overall_ratio(self):
        stats = dataset_stats(_multi_source_dataset())
        assert stats["images"] == 3
        assert stats["instances"] == 6
        assert stats["ins_per_img"] == 2.0

    def test_per_source_rows(self):
        stats = dataset_stats(_multi_source_dataset())
        assert stats["sources"] == {
            "alpha": {"images": 1, "instances": 3, "ins_per_img": 3.0},
            "beta": {"images": 2, "instances": 3, "ins_per_img": 1.5},
        }

    def test_sources_sorted_by_name(self):
        stats = dataset_stats(_multi_source_dataset())
        names = list(stats["sources"])
        assert names == sorted(names)

    def test_image_without_annotations_still_counted(self):
        d = AnnotatedDataset(
            (ImageRecord(1, "a.png", 32, 32, source_dataset="s"),
             ImageRecord(2, "b.png", 32, 32, source_dataset="s")),
            (box_instance(1, 1, 1, (0, 0, 4, 4)),))
        stats = dataset_stats(d)
        assert stats["sources"]["s"] == {
            "images": 2, "instances": 1, "ins_per_img": 0.5}

    def test_empty_dataset_is_an_error(self):
        with pytest.raises(EmptyDatasetError):
            dataset_stats(AnnotatedDataset((), ()))


class TestCategoryStats:
    def test_single_category(self):
        images = (ImageRecord(1, "a.png", 64, 64),)
        anns = tuple(box_instance(i, 1, 1, (float(i), 0, 10, 5))
                     for i in range(1, 11))
        out = category_stats(AnnotatedDataset(images, anns))
        assert out["ship"]["instances"] == 10
        assert out["ship"]["percentage"] == 100.0
        assert out["ship"]["mean_area"] == 50.0

    def test_three_to_one_ratio(self):
        images = (ImageRecord(1, "a.png", 64, 64),)
        anns = (
            box_instance(1, 1, 1, (0, 0, 2, 2)),
            box_instance(2, 1, 1, (4, 4, 2, 2)),
            box_instance(3, 1, 1, (8, 8, 2, 2)),
            box_instance(4, 1, 2, (12, 12, 2, 2)),
        )
        out = category_stats(AnnotatedDataset(images, anns))
        assert out["ship"]["percentage"] == 75.0
        assert out["aircraft"]["percentage"] == 25.0

    def test_declared_category_with_no_instances(self):
        images = (ImageRecord(1, "a.png", 64, 64),)
        anns = (box_instance(1, 1, 1, (0, 0, 2, 2)),)
        out = category_stats(AnnotatedDataset(images, anns))
        assert out["aircraft"] == {
            "instances": 0, "percentage": 0.0, "mean_area": 0.0}

    def test_matches_brute_force_accumulation(self, rng):
        cats = ((1, "ship"), (2, "aircraft"), (3, "tank"))
        images = tuple(ImageRecord(i, f"im{i:03d}.png", 128, 128)
                       for i in range(1, 9))
        anns = []
        for img in images:
            for _ in range(int(rng.integers(2, 6))):
                w, h = (float(v) for v in rng.integers(2, 30, 2))
                x, y = (float(v) for v in rng.integers(0, 98, 2))
                cid = int(rng.integers(1, 4))
                anns.append(box_instance(len(anns) + 1, img.id, cid, (x, y, w, h)))
        out = category_stats(AnnotatedDataset(images, tuple(anns), cats))

        total = len(anns)
        for cid, name in cats:
            areas = [a.area for a in anns if a.category_id == cid]
            assert out[name]["instances"] == len(areas)
            assert out[name]["percentage"] == pytest.approx(
                100.0 * len(areas) / total, rel=1e-12)
            assert out[name]["mean_area"] == pytest.approx(
                sum(areas) / len(areas), rel=1e-12)
        assert sum(v["percentage"] for v in out.values()) == pytest.approx(
            100.0, abs=0.01)

    def test_empty_dataset_is_an_error(self):
        with pytest.raises(EmptyDatasetError):
            category_stats(AnnotatedDataset((), ()))


class TestCorpusHistogram:
    def test_basic_properties(self):
        h = CorpusHistogram("pixel", np.array([1, 2, 3]), 6)
        assert h.bins == 3
        assert h.counts.dtype == np.int64
        np.testing.assert_allclose(h.normalized, [1 / 6, 2 / 6, 3 / 6])
        assert h.normalized.sum() == pytest.approx(1.0)

    def test_counts_are_read_only(self):
        h = CorpusHistogram("pixel", np.array([1, 2, 3]), 6)
        with pytest.raises(ValueError):
            h.counts[0] = 99

    def test_rejects_bad_shapes_and_values(self):
        with pytest.raises(HistogramError):
            CorpusHistogram("pixel", np.array([[1, 2], [3, 4]]), 10)
        with pytest.raises(HistogramError):
            CorpusHistogram("pixel", np.array([5]), 5)
        with pytest.raises(HistogramError):
            CorpusHistogram("pixel", np.array([1, -1]), 0)
        with pytest.raises(HistogramError):
            CorpusHistogram("pixel", np.array([1, 2]), 4)

    def test_empty_histogram_has_no_frequencies(self):
        h = CorpusHistogram("pixel", np.zeros(4, dtype=np.int64), 0)
        with pytest.raises(HistogramError):
            h.normalized

    def test_merge_adds_counts_and_totals(self):
        a = CorpusHistogram("pixel", np.array([1, 0, 2]), 3)
        b = CorpusHistogram("pixel", np.array([0, 4, 1]), 5)
        m = a.merge(b)
        np.testing.assert_array_equal(m.counts, [1, 4, 3])
        assert m.total == 8
        assert m.space == "pixel"

    def test_merge_rejects_mismatches(self):
        a = CorpusHistogram("pixel", np.array([1, 1]), 2)
        with pytest.raises(HistogramError):
            a.merge(CorpusHistogram("canny", np.array([1, 1]), 2))
        with pytest.raises(HistogramError):
            a.merge(CorpusHistogram("pixel", np.array([1, 1, 1]), 3))


class TestBinValues:
    @staticmethod
    def oracle(values, bins):
        counts = np.zeros(bins, dtype=np.int64)
        for v in np.asarray(values, dtype=np.float64).ravel():
            counts[min(int(v * bins), bins - 1)] += 1
        return counts

    @pytest.mark.parametrize("bins", [2, 7, 256])
    def test_matches_elementwise_oracle(self, rng, bins):
        values = np.concatenate([rng.random(500), [0.0, 1.0, 0.5]])
        np.testing.assert_array_equal(bin_values(values, bins),
                                      self.oracle(values, bins))

    def test_one_lands_in_last_bin(self):
        counts = bin_values(np.array([1.0]), 16)
        assert counts[15] == 1 and counts.sum() == 1

    def test_zero_lands_in_first_bin(self):
        counts = bin_values(np.array([0.0]), 16)
        assert counts[0] == 1 and counts.sum() == 1

    def test_exact_dyadic_boundaries(self):
        # k/8 sits exactly on the lower edge of bin k; 1.0 folds into the
        # last bin alongside 7/8.
        values = np.array([k / 8 for k in range(8)] + [1.0])
        np.testing.assert_array_equal(bin_values(values, 8),
                                      [1, 1, 1, 1, 1, 1, 1, 2])

    def test_conserves_count_and_shape(self, rng):
        values = rng.random((37, 23))
        counts = bin_values(values, 64)
        assert counts.shape == (64,)
        assert counts.sum() == values.size
        assert counts.dtype == np.int64


class TestImageHistogram:
    def test_known_small_raster(self):
        r = make_raster([[0.0, 0.5], [0.999, 1.0]])
        h = image_histogram(r, bins=4)
        assert h.space == "pixel"
        assert h.total == 4
        np.testing.assert_array_equal(h.counts, [1, 0, 1, 2])

    def test_eight_bit_file_histogram_equals_byte_counts(self, rng, tmp_path):
        # With 256 bins and both extremes present, min-max normalization
        # sends every 8-bit level to its own bin, so the histogram of a
        # file must equal the byte-value counts.
        arr = rng.integers(0, 256, (24, 24), dtype=np.uint8)
        arr[0, 0], arr[0, 1] = 0, 255
        path = tmp_path / "img.png"
        Image.fromarray(arr).save(path)
        h = image_histogram(path, bins=256)
        np.testing.assert_array_equal(
            h.counts, np.bincount(arr.ravel(), minlength=256))

    def test_binary_descriptor_mass_sits_at_extremes(self, rng):
        h = image_histogram(natural_image(rng, 32), space="canny", bins=256)
        assert h.counts[0] > 0
        assert h.counts[-1] > 0
        assert h.counts[1:-1].sum() == 0

    def test_unknown_space_rejected(self):
        with pytest.raises(ParameterError, match="pixel"):
            image_histogram(make_raster(np.zeros((4, 4))), space="sobel")

    def test_too_few_bins_rejected(self):
        with pytest.raises(ParameterError):
            image_histogram(make_raster(np.zeros((4, 4))), bins=1)

    def test_default_bins(self, rng):
        h = image_histogram(random_raster(rng, 8, 8))
        assert h.bins == BINS_DEFAULT


class TestCorpusAccumulation:
    def test_equals_merged_per_image_histograms(self, rng):
        rasters = [random_raster(rng, 16, 16) for _ in range(5)]
        whole = corpus_histogram(rasters, bins=32)
        parts = [image_histogram(r, bins=32) for r in rasters]
        acc = parts[0]
        for p in parts[1:]:
            acc = acc.merge(p)
        np.testing.assert_array_equal(whole.counts, acc.counts)
        assert whole.total == acc.total

    def test_equals_binning_the_concatenated_values(self, rng):
        rasters = [random_raster(rng, 16, 16) for _ in range(5)]
        whole = corpus_histogram(rasters, bins=32)
        flat = np.concatenate([r.values.ravel() for r in rasters])
        np.testing.assert_array_equal(whole.counts, bin_values(flat, 32))

    def test_merge_order_does_not_change_counts(self, rng):
        parts = [image_histogram(random_raster(rng, 8, 8), bins=16)
                 for _ in range(4)]
        left = parts[0].merge(parts[1]).merge(parts[2]).merge(parts[3])
        right = parts[0].merge(parts[1].merge(parts[2].merge(parts[3])))
        reverse = parts[3].merge(parts[2]).merge(parts[1]).merge(parts[0])
        np.testing.assert_array_equal(left.counts, right.counts)
        np.testing.assert_array_equal(left.counts, reverse.counts)

    def test_empty_corpus_is_an_error(self):
        with pytest.raises(EmptyDatasetError):
            corpus_histogram([])


class TestPcc:
    def test_identical_corpora_correlate_at_one(self, rng):
        h = corpus_histogram([random_raster(rng, 16, 16)], bins=32)
        value = pcc(h, h)
        assert value == pytest.approx(1.0, abs=1e-12)
        assert value <= 1.0

    def test_symmetric_bit_exactly(self, rng):
        a = corpus_histogram([random_raster(rng, 16, 16)], bins=32)
        b = corpus_histogram([natural_image(rng, 24)], bins=32)
        assert pcc(a, b) == pcc(b, a)

    def test_invariant_to_count_rescaling(self):
        a = CorpusHistogram("pixel", np.array([3, 1, 0, 4]), 8)
        b = CorpusHistogram("pixel", np.array([1, 2, 2, 1]), 6)
        b7 = CorpusHistogram("pixel", b.counts * 7, b.total * 7)
        assert pcc(a, b7) == pytest.approx(pcc(a, b), abs=1e-12)

    def test_opposite_histograms_correlate_at_minus_one(self):
        a = CorpusHistogram("pixel", np.array([10, 0]), 10)
        b = CorpusHistogram("pixel", np.array([0, 10]), 10)
        value = pcc(a, b)
        assert value == pytest.approx(-1.0, abs=1e-12)
        assert value >= -1.0

    def test_space_mismatch_rejected(self):
        a = CorpusHistogram("pixel", np.array([1, 1]), 2)
        b = CorpusHistogram("hog", np.array([1, 1]), 2)
        with pytest.raises(HistogramError, match="space"):
            pcc(a, b)

    def test_bin_mismatch_rejected(self):
        a = CorpusHistogram("pixel", np.array([1, 1]), 2)
        b = CorpusHistogram("pixel", np.array([1, 1, 1]), 3)
        with pytest.raises(HistogramError, match="bin"):
            pcc(a, b)

    def test_constant_histogram_rejected(self):
        flat = CorpusHistogram("pixel", np.array([5, 5, 5]), 15)
        other = CorpusHistogram("pixel", np.array([1, 2, 3]), 6)
        with pytest.raises(HistogramError, match="constant"):
            pcc(flat, other)


class TestSpeckle:
    def test_deterministic_per_seed(self, rng):
        r = random_raster(rng, 32, 32)
        np.testing.assert_array_equal(speckle(r, 7).values, speckle(r, 7).values)
        assert not np.array_equal(speckle(r, 7).values, speckle(r, 8).values)

    def test_unit_mean_noise_preserves_brightness(self):
        r = make_raster(np.full((128, 128), 0.5, dtype=np.float32))
        out = speckle(r, seed=3)
        assert float(out.values.mean()) == pytest.approx(0.5, abs=0.02)

    def test_single_look_exponential_tail(self):
        # Shape-1 gamma noise is exponential: P(noise > 1) = 1/e, so a
        # constant image keeps about 36.8% of pixels above its old value.
        r = make_raster(np.full((128, 128), 0.5, dtype=np.float32))
        out = speckle(r, seed=11)
        frac = float((out.values > 0.5).mean())
        assert frac == pytest.approx(np.exp(-1.0), abs=0.025)

    def test_output_is_unnormalized_with_true_range(self):
        r = make_raster(np.full((64, 64), 0.5, dtype=np.float32))
        out = speckle(r, seed=5)
        assert out.values.dtype == np.float32
        assert out.value_range == (0.0, float(out.values.max()))
        assert out.values.max() > 1.0

    def test_zero_image_keeps_a_usable_range(self):
        out = speckle(make_raster(np.zeros((8, 8), dtype=np.float32)), seed=1)
        assert not out.values.any()
        assert out.value_range == (0.0, 1.0)


class TestPccReport:
    def test_structure_and_value_agreement(self, rng):
        corpus_a = [natural_image(rng, 24) for _ in range(3)]
        corpus_b = [natural_image(rng, 24) for _ in range(3)]
        report = pcc_report(corpus_a, corpus_b, spaces=("pixel", "canny"),
                            bins=64, names=("clean", "noisy"))
        assert report["corpora"] == {"clean": 3, "noisy": 3}
        assert report["bins"] == 64
        assert set(report["pcc"]) == {"pixel", "canny"}
        for space in ("pixel", "canny"):
            direct = pcc(corpus_histogram(corpus_a, space, 64),
                         corpus_histogram(corpus_b, space, 64))
            assert report["pcc"][space] == direct

    def test_report_is_json_ready(self, rng):
        corpus = [random_raster(rng, 16, 16) for _ in range(2)]
        report = pcc_report(corpus, corpus, spaces=("pixel",), bins=16)
        assert json.loads(json.dumps(report)) == report

    def test_default_spaces_cover_pixel_and_all_descriptors(self):
        assert SPACES[0] == "pixel"
        assert set(SPACES[1:]) == {"hog", "canny", "haar", "wst", "gre"}

    def test_scattering_space_narrows_the_speckle_gap(self, rng):
        # Multiplicative speckle wrecks the raw value distribution but
        # largely survives spatial averaging, so corpus correlation must
        # come out higher in scattering space than in pixel space.
        clean = [natural_image(rng, 48) for _ in range(10)]
        noisy = [speckle(r, seed=100 + i) for i, r in enumerate(clean)]
        report = pcc_report(clean, noisy, spaces=("pixel", "wst"), bins=64)
        assert report["pcc"]["wst"] > report["pcc"]["pixel"]
