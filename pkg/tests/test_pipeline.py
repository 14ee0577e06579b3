import json

import numpy as np
import pytest

from fragseg.bars import BarSet
from fragseg.errors import AlignmentFailed, OutOfBounds
from fragseg.corpus import RasterGray8, RasterRGB
from fragseg.evaluation import confusion, metrics
from fragseg.geometry import PolygonWithHoles, Ring, from_wkt, rasterize
from fragseg.maskops import Mask
from fragseg.pipeline import (PipelineConfig, area_filter, emit_outputs,
                              extract_fragment, overlap_filter, seed_for_set,
                              segment_fragment)
from fragseg.synth import generate_set


def square_poly(x0, y0, side):
    return PolygonWithHoles(Ring([(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)]))


class TestAreaFilter:
    def test_boundaries(self):
        just_under = from_wkt("POLYGON ((0 0, 39.98 0, 39.98 25, 0 25, 0 0))")
        exactly = from_wkt("POLYGON ((0 0, 40 0, 40 25, 0 25, 0 0))")
        kept = area_filter([just_under, exactly], 1000.0)
        assert kept == [exactly]

    def test_zero_is_identity(self):
        polys = [square_poly(0, 0, 2), square_poly(5, 5, 1)]
        assert area_filter(polys, 0.0) == polys


class TestOverlapFilter:
    def test_cases(self):
        both = np.zeros((40, 40), dtype=bool)
        both[5:15, 5:15] = True
        recto_only = both.copy()
        recto_only[25:30, 25:30] = True
        poly_in_both = square_poly(6, 6, 5)
        poly_recto_only = square_poly(25, 25, 4)
        kept = overlap_filter([poly_in_both, poly_recto_only],
                              Mask(recto_only), Mask(both))
        assert kept == [poly_in_both]

    def test_empty(self):
        assert overlap_filter([], Mask.zeros(4, 4), Mask.zeros(4, 4)) == []

    def test_min_fraction(self):
        recto = np.zeros((30, 30), dtype=bool)
        recto[0:11, 0:11] = True
        verso = np.ones((30, 30), dtype=bool)
        poly = square_poly(0, 0, 20)  # 441 px; 121 overlap recto
        assert overlap_filter([poly], Mask(recto), Mask(verso)) == [poly]
        assert overlap_filter([poly], Mask(recto), Mask(verso), min_fraction=0.5) == []


class TestExtractFragment:
    def test_full_rectangle(self):
        rng = np.random.default_rng(0)
        img = RasterRGB(rng.integers(0, 255, (10, 10, 3), dtype=np.uint8))
        out = extract_fragment(img, square_poly(0, 0, 9))
        assert np.array_equal(out.pixels, img.pixels)

    def test_crop(self):
        img = RasterGray8(np.arange(400, dtype=np.uint8).reshape(20, 20))
        out = extract_fragment(img, square_poly(10, 10, 3))
        assert out.pixels.shape == (4, 4)
        assert np.array_equal(out.pixels, img.pixels[10:14, 10:14])

    def test_out_of_bounds(self):
        img = RasterGray8(np.zeros((10, 10), dtype=np.uint8))
        with pytest.raises(OutOfBounds):
            extract_fragment(img, square_poly(5, 5, 10))


class TestSeedDerivation:
    def test_stable_and_distinct(self):
        assert seed_for_set(0, "a_1") == seed_for_set(0, "a_1")
        assert seed_for_set(0, "a_1") != seed_for_set(0, "a_2")
        assert seed_for_set(0, "a_1") != seed_for_set(1, "a_1")


class TestConfig:
    def test_json_round_trip(self, tmp_path):
        cfg = PipelineConfig(seed=42, extractors=("sift",), final_min_area=500.0)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        assert PipelineConfig.from_json(path) == cfg

    def test_defaults_match_home_modules(self):
        cfg = PipelineConfig()
        assert cfg.threshold.dark_cap == 50 and cfg.threshold.buffer == 10
        assert cfg.hsv.lo == (0, 0, 100) and cfg.hsv.hi == (255, 20, 200)
        assert (cfg.closing_se.width, cfg.closing_se.height) == (21, 21)
        assert cfg.final_min_area == 1000.0
        assert cfg.ratio == 0.80
        assert cfg.tolerances == tuple(range(21, 4, -2))
        assert cfg.min_inliers == 10

    def test_ppi_scaling(self):
        from fragseg.pipeline import _scaled

        eff = _scaled(PipelineConfig(), ppi=2430.0)
        assert eff["bar_pad"] == 20
        assert eff["final_min_area"] == 4000.0
        assert eff["pre_close_min_area"] == 400
        assert eff["se"].width == 41  # kernel radius doubles with density
        same = _scaled(PipelineConfig(), ppi=1215.0)
        assert same["bar_pad"] == 10 and same["se"].width == 21


@pytest.fixture(scope="module")
def small_synth():
    return generate_set(seed=77, size=640)


@pytest.fixture(scope="module")
def small_result(small_synth):
    return segment_fragment(small_synth.image_set, small_synth.bar_boxes, PipelineConfig())


class TestSegmentFragment:
    def test_synthetic_quality(self, small_synth, small_result):
        gt = rasterize(list(small_synth.gt_polygons), 640, 640)
        pred = rasterize(list(small_result.polygons), 640, 640)
        m = metrics(confusion(pred, gt))
        assert m.iou >= 0.93
        assert m.recall >= 0.97

    def test_polygons_sorted_and_in_bounds(self, small_result):
        from fragseg.geometry import polygon_area, validate

        areas = [polygon_area(p) for p in small_result.polygons]
        assert areas == sorted(areas, reverse=True)
        min_area = 1000.0 * (1215 / 1215) ** 2
        for p, area in zip(small_result.polygons, areas):
            assert validate(p) == []
            assert area >= min_area
            x0, y0, x1, y1 = p.bounds()
            assert 0 <= x0 and 0 <= y0 and x1 < 640 and y1 < 640

    def test_three_fragments(self):
        s = generate_set(seed=78, size=640, fragments=3)
        res = segment_fragment(s.image_set, s.bar_boxes, PipelineConfig())
        gt = rasterize(list(s.gt_polygons), 640, 640)
        big = [p for p in res.polygons
               if rasterize(p, 640, 640).area > 2000]
        assert len(big) == 3
        pred = rasterize(list(res.polygons), 640, 640)
        m = metrics(confusion(pred, gt))
        assert m.iou >= 0.90

    def test_all_background(self):
        rng = np.random.default_rng(5)
        felt = np.clip(rng.normal(15, 5, (300, 300)), 0, 255).astype(np.uint8)
        fake = RasterRGB(np.repeat(felt[:, :, None], 3, axis=2))
        from fragseg.corpus import FragmentImageSet

        image_set = FragmentImageSet("x", "1", fake, RasterGray8(felt),
                                     fake, RasterGray8(felt))
        with pytest.raises(AlignmentFailed):
            segment_fragment(image_set, BarSet.empty(), PipelineConfig())

    def test_determinism(self, small_synth, small_result):
        from fragseg.geometry import to_wkt

        again = segment_fragment(small_synth.image_set, small_synth.bar_boxes, PipelineConfig())
        assert [to_wkt(p) for p in again.polygons] == [to_wkt(p) for p in small_result.polygons]
        assert np.array_equal(again.transform.matrix, small_result.transform.matrix)

    def test_keep_masks(self, small_synth):
        res = segment_fragment(small_synth.image_set, small_synth.bar_boxes,
                               PipelineConfig(), keep_masks=True)
        assert set(res.masks) == {"recto_threshold", "verso_threshold_aligned",
                                  "fragment", "backing", "final"}
        # containment: final mask is the fragment mask minus backing
        assert not (res.masks["final"].bits & ~res.masks["fragment"].bits).any()


class TestEmitOutputs:
    def test_counts_and_manifest(self, small_synth, small_result, tmp_path):
        manifest = emit_outputs(small_result, small_synth.image_set, tmp_path / "out")
        n = len(small_result.polygons)
        assert len(manifest["wkt"]) == n
        assert len(manifest["extracted"]) == n
        log = json.loads((tmp_path / "out" / "log.json").read_text())
        assert log["polygons"] == n
        assert (tmp_path / "out" / f"{small_synth.image_set.set_id}_overlay.png").exists()
        align = json.loads((tmp_path / "out" / f"{small_synth.image_set.set_id}_alignment.json").read_text())
        assert set(align) == {"matrix", "inliers", "extractor", "tolerance"}

    def test_empty_result(self, small_synth, small_result, tmp_path):
        from dataclasses import replace

        empty = replace(small_result, polygons=(), flags=("empty_output",))
        manifest = emit_outputs(empty, small_synth.image_set, tmp_path / "empty")
        assert manifest["wkt"] == [] and manifest["extracted"] == []
        log = json.loads((tmp_path / "empty" / "log.json").read_text())
        assert log["flags"] == ["empty_output"]
