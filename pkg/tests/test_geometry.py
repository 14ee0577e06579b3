from fractions import Fraction

import numpy as np
import pytest

from fragseg.errors import DegenerateRing, UnrepairableGeometry, WktParseError
from fragseg.geometry import (PolygonWithHoles, Ring, forest_to_polygons,
                              from_wkt, polygon_area, rasterize, repair,
                              to_wkt, to_wkt_multi, trace_contours, untangle,
                              validate)
from fragseg.maskops import Mask


def square(x0, y0, side):
    return Ring([(x0, y0), (x0 + side, y0), (x0 + side, y0 + side), (x0, y0 + side)])


def hole(x0, y0, side):
    return square(x0, y0, side).reversed()


BOWTIE = PolygonWithHoles(Ring([(0, 0), (2, 2), (2, 0), (0, 2)]))


class TestRing:
    def test_consecutive_duplicates_removed(self):
        r = Ring([(0, 0), (0, 0), (4, 0), (4, 4), (4, 4), (0, 4), (0, 0)])
        assert r.points == ((0, 0), (4, 0), (4, 4), (0, 4))

    def test_too_short(self):
        with pytest.raises(DegenerateRing):
            Ring([(0, 0), (1, 1)])

    def test_orientation(self):
        assert square(0, 0, 4).is_ccw()
        assert not hole(0, 0, 4).is_ccw()


class TestArea:
    def test_square(self):
        assert polygon_area(PolygonWithHoles(square(0, 0, 4))) == 16.0

    def test_shell_with_hole(self):
        p = PolygonWithHoles(square(0, 0, 10), [hole(4, 4, 2)])
        assert polygon_area(p) == 96.0

    def test_area_close_to_raster_count(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            x0, y0 = rng.integers(1, 10, 2)
            w, h = rng.integers(2, 30, 2)
            p = PolygonWithHoles(square(int(x0), int(y0), int(w)))
            raster = rasterize(p, 64, 64).area
            perimeter = 4 * int(w)
            assert abs(polygon_area(p) - raster) <= 2 * perimeter


class TestTraceContours:
    def test_solid_square(self):
        bits = np.zeros((10, 10), dtype=bool)
        bits[2:6, 3:7] = True
        forest = trace_contours(Mask(bits))
        assert len(forest) == 1 and forest[0].depth == 0
        polys = forest_to_polygons(forest)
        assert rasterize(polys, 10, 10).area == 16
        assert np.array_equal(rasterize(polys, 10, 10).bits, bits)

    def test_donut(self):
        bits = np.zeros((12, 12), dtype=bool)
        bits[2:10, 2:10] = True
        bits[4:8, 4:8] = False
        forest = trace_contours(Mask(bits))
        assert len(forest) == 1
        assert forest[0].depth == 0
        assert len(forest[0].children) == 1
        assert forest[0].children[0].depth == 1
        polys = forest_to_polygons(forest)
        assert len(polys) == 1 and len(polys[0].holes) == 1
        assert np.array_equal(rasterize(polys, 12, 12).bits, bits)

    def test_donut_with_island(self):
        bits = np.zeros((20, 20), dtype=bool)
        bits[1:19, 1:19] = True
        bits[4:16, 4:16] = False
        bits[8:12, 8:12] = True
        polys = forest_to_polygons(trace_contours(Mask(bits)))
        assert len(polys) == 2
        assert np.array_equal(rasterize(polys, 20, 20).bits, bits)

    def test_empty(self):
        assert trace_contours(Mask.zeros(5, 5)) == []

    def test_orientations_normalized(self):
        bits = np.zeros((12, 12), dtype=bool)
        bits[2:10, 2:10] = True
        bits[4:8, 4:8] = False
        poly = forest_to_polygons(trace_contours(Mask(bits)))[0]
        assert poly.shell.is_ccw()
        assert not poly.holes[0].is_ccw()


def random_rectilinear_mask(rng, size=64, n_rects=6):
    bits = np.zeros((size, size), dtype=bool)
    for _ in range(n_rects):
        w, h = rng.integers(2, size // 2, 2)
        x = int(rng.integers(0, size - w))
        y = int(rng.integers(0, size - h))
        bits[y:y + h, x:x + w] = True
    return bits


class TestRoundTrip:
    def test_rectangles_exact(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            bits = np.zeros((40, 40), dtype=bool)
            w, h = rng.integers(1, 18, 2)
            x, y = rng.integers(0, 20, 2)
            bits[y:y + h, x:x + w] = True
            if bits.sum() < 3:
                continue
            polys = forest_to_polygons(trace_contours(Mask(bits)))
            assert np.array_equal(rasterize(polys, 40, 40).bits, bits)

    def test_random_rectilinear_iou(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            bits = random_rectilinear_mask(rng)
            polys = forest_to_polygons(trace_contours(Mask(bits)))
            back = rasterize(polys, 64, 64).bits
            inter = (bits & back).sum()
            union_ = (bits | back).sum()
            assert union_ == 0 or inter / union_ >= 0.99


class TestValidate:
    def test_valid_square(self):
        assert validate(PolygonWithHoles(square(0, 0, 4))) == []

    def test_bowtie_self_intersection(self):
        violations = validate(BOWTIE)
        kinds = {v.kind for v in violations}
        assert kinds == {"self_intersection"}
        assert any(abs(v.location[0] - 1) < 1e-9 and abs(v.location[1] - 1) < 1e-9
                   for v in violations)

    def test_hole_outside_shell(self):
        p = PolygonWithHoles(square(0, 0, 10), [hole(20, 20, 2)])
        assert {v.kind for v in validate(p)} == {"hole_outside_shell"}

    def test_bad_orientation(self):
        p = PolygonWithHoles(square(0, 0, 4).reversed())
        assert {v.kind for v in validate(p)} == {"bad_orientation"}
        p2 = PolygonWithHoles(square(0, 0, 10), [square(4, 4, 2)])
        assert "bad_orientation" in {v.kind for v in validate(p2)}

    def test_overlapping_holes(self):
        p = PolygonWithHoles(square(0, 0, 20), [hole(4, 4, 6), hole(7, 7, 6)])
        assert {v.kind for v in validate(p)} == {"overlapping_holes"}

    def test_touching_holes_allowed(self):
        p = PolygonWithHoles(square(0, 0, 20), [hole(4, 4, 3), hole(7, 7, 3)])
        assert validate(p) == []

    def test_degenerate_collinear(self):
        p = PolygonWithHoles(Ring([(0, 0), (2, 2), (5, 5)]))
        assert {v.kind for v in validate(p)} == {"degenerate_ring"}

    def test_repeated_vertex_pinch(self):
        p = PolygonWithHoles(Ring([(0, 0), (4, 0), (4, 4), (2, 2), (0, 4), (2, 2)]))
        assert "self_intersection" in {v.kind for v in validate(p)}


class TestRepair:
    def test_valid_input_untouched(self):
        p = PolygonWithHoles(square(0, 0, 10), [hole(3, 3, 2)])
        assert repair(p) == [p]

    def test_bowtie(self):
        out = repair(BOWTIE)
        assert len(out) == 2
        for p in out:
            assert validate(p) == []
        got = rasterize(out, 64, 64)
        want = rasterize(BOWTIE, 64, 64)
        assert np.array_equal(got.bits, want.bits)

    def test_duplicate_points_removed_only(self):
        ring = Ring([(0, 0), (0, 0), (8, 0), (8, 8), (0, 8)])
        p = PolygonWithHoles(ring)
        assert repair(p) == [PolygonWithHoles(square(0, 0, 8))]

    def test_orphan_hole_discarded(self):
        p = PolygonWithHoles(square(0, 0, 10), [hole(30, 30, 3)])
        out = repair(p)
        assert out == [PolygonWithHoles(square(0, 0, 10))]

    def test_protruding_hole_clipped(self):
        p = PolygonWithHoles(square(0, 0, 10), [hole(5, 3, 10)])
        out = repair(p)
        assert out and all(validate(q) == [] for q in out)
        got = rasterize(out, 32, 32)
        # covered area equals shell minus the in-shell part of the hole
        shell = rasterize(PolygonWithHoles(square(0, 0, 10)), 32, 32).bits
        carve = rasterize(PolygonWithHoles(square(5, 3, 10)), 32, 32).bits
        want = shell & ~carve
        mismatch = got.bits ^ want
        assert mismatch.sum() <= 40  # float boundary skin only
        assert not got.bits[4:10, 12:]. any()

    def test_crossing_holes_become_island(self):
        p = PolygonWithHoles(square(0, 0, 20), [hole(4, 4, 8), hole(8, 8, 8)])
        out = repair(p)
        assert out and all(validate(q) == [] for q in out)
        got = rasterize(out, 32, 32).bits
        # even-odd: the double-hole overlap flips back to foreground
        assert got[10, 10]
        assert not got[6, 6]
        assert not got[14, 14]

    def test_spur_collapses(self):
        # out-and-back appendage at (2,2)..(0,4) carries no area
        p = PolygonWithHoles(Ring([(0, 0), (4, 0), (4, 4), (2, 2), (0, 4), (2, 2)]))
        out = repair(p)
        assert out == [PolygonWithHoles(Ring([(0, 0), (4, 0), (4, 4), (2, 2)]))]

    def test_pinch_splits_into_lobes(self):
        p = PolygonWithHoles(Ring([(0, 0), (4, 0), (2, 2), (4, 4), (0, 4), (2, 2)]))
        out = repair(p)
        assert len(out) == 2
        assert all(validate(q) == [] for q in out)
        assert np.array_equal(rasterize(out, 16, 16).bits, rasterize(p, 16, 16).bits)

    def test_winding_ring_becomes_annulus(self):
        ring = [(0, 0), (10, 0), (10, 10), (0, 10), (0, 2),
                (2, 2), (2, 8), (8, 8), (8, 2), (0, 2)]
        out = repair(PolygonWithHoles(Ring(ring)))
        assert len(out) == 1 and len(out[0].holes) == 1
        assert validate(out[0]) == []

    def test_idempotent(self):
        out = repair(BOWTIE)
        again = [q for p in out for q in repair(p)]
        assert again == out

    def test_unrepairable(self):
        with pytest.raises(UnrepairableGeometry):
            repair(PolygonWithHoles(Ring([(0, 0), (3, 3), (9, 9)])))

    def test_repair_output_always_validates(self):
        rng = np.random.default_rng(17)
        checked = 0
        for _ in range(40):
            pts = [(int(x), int(y)) for x, y in rng.integers(0, 30, (7, 2))]
            try:
                poly = PolygonWithHoles(Ring(pts))
            except DegenerateRing:
                continue
            try:
                pieces = repair(poly)
            except UnrepairableGeometry:
                continue
            for piece in pieces:
                assert validate(piece) == [], (pts, piece)
            checked += 1
        assert checked >= 20


class TestWkt:
    def test_canonical_square(self):
        assert to_wkt(PolygonWithHoles(square(0, 0, 4))) == "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0))"

    def test_donut(self):
        p = PolygonWithHoles(square(0, 0, 10), [hole(3, 3, 2)])
        text = to_wkt(p)
        assert text.startswith("POLYGON ((0 0, 10 0, 10 10, 0 10, 0 0), (")
        assert from_wkt(text) == p

    def test_round_trip_floats(self):
        p = PolygonWithHoles(Ring([(0.5, 0.25), (4.125, 0.0), (2.0, 3.75)]))
        assert from_wkt(to_wkt(p)) == p

    def test_fraction_coordinates_serialize(self):
        p = PolygonWithHoles(Ring([(Fraction(1, 2), 0), (4, 0), (2, 3)]))
        assert "0.5 0" in to_wkt(p)

    def test_ring_too_short(self):
        with pytest.raises(WktParseError):
            from_wkt("POLYGON ((0 0, 1 1))")

    def test_malformed_keyword(self):
        with pytest.raises(WktParseError):
            from_wkt("POLYGO(")

    def test_unclosed_ring(self):
        with pytest.raises(WktParseError):
            from_wkt("POLYGON ((0 0, 4 0, 4 4, 0 4))")

    def test_position_reported(self):
        try:
            from_wkt("POLYGON ((0 0, 4 0, 4 4, x))")
        except WktParseError as exc:
            assert exc.position > 0
        else:
            pytest.fail("expected WktParseError")

    def test_multipolygon(self):
        polys = [PolygonWithHoles(square(0, 0, 2)), PolygonWithHoles(square(5, 5, 2))]
        text = to_wkt_multi(polys)
        assert from_wkt(text) == polys
        assert from_wkt("MULTIPOLYGON EMPTY") == []


class TestRasterize:
    def test_pixel_block_square(self):
        # ring enclosing a 4x4 pixel block (traced-coordinates convention)
        p = PolygonWithHoles(square(0, 0, 3))
        assert rasterize(p, 10, 10).area == 16

    def test_donut_counts(self):
        p = PolygonWithHoles(square(0, 0, 9), [hole(3, 3, 3)])
        shell_only = rasterize(PolygonWithHoles(square(0, 0, 9)), 20, 20).area
        got = rasterize(p, 20, 20).area
        # hole ring pixels stay foreground under the inclusive convention,
        # so only the 2x2 strict interior of the 3..6 ring is carved out
        assert shell_only == 100
        assert got == 96

    def test_empty_list(self):
        assert rasterize([], 8, 8).area == 0

    def test_origin_window_equivalence(self):
        p = PolygonWithHoles(square(5, 7, 6))
        full = rasterize(p, 32, 32)
        window = rasterize(p, 10, 10, origin=(4, 6))
        assert np.array_equal(window.bits, full.bits[6:16, 4:14])

    def test_out_of_canvas_clipped(self):
        p = PolygonWithHoles(square(-5, -5, 30))
        r = rasterize(p, 10, 10)
        assert r.area == 100


class TestUntangle:
    def test_spur_dropped(self):
        loops = untangle([(0, 0), (4, 0), (6, 0), (4, 0), (4, 4), (0, 4)])
        assert len(loops) == 1
        assert set(loops[0]) == {(0, 0), (4, 0), (4, 4), (0, 4)}

    def test_preserves_parity_on_random_self_crossing_rings(self):
        # splitting at crossings keeps the edge multiset, so crossing parity
        # at any off-boundary point must be unchanged
        from fragseg.geometry.primitives import exact_points, locate_point

        rng = np.random.default_rng(3)
        for _ in range(12):
            pts = [(int(x), int(y)) for x, y in rng.integers(0, 20, (6, 2))]
            ring = [p for i, p in enumerate(pts) if p != pts[i - 1]]
            if len(set(ring)) < 3:
                continue
            original = exact_points(ring)
            loops = [exact_points(l) for l in untangle(ring)]
            for y in range(0, 22, 2):
                for x in range(0, 22, 2):
                    locs = [locate_point((x, y), l) for l in loops]
                    if locate_point((x, y), original) == -1 or -1 in locs:
                        continue
                    want = locate_point((x, y), original)
                    assert sum(locs) % 2 == want, (ring, (x, y))
