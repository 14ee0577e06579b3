import numpy as np
import pytest

from fragseg.corpus import RasterGray8, RasterHSV, RasterRGB
from fragseg.errors import DimensionMismatch
from fragseg.maskops import (HsvRange, Mask, StructuringElement, backing_mask,
                             complement, dynamic_threshold_value, hsv_in_range,
                             intersect, morph_close, remove_small_components,
                             subtract, threshold_mask, union)


def _gray(arr):
    return RasterGray8(np.asarray(arr, dtype=np.uint8))


def _mask(arr):
    return Mask(np.asarray(arr, dtype=bool))


def brute_force_threshold(pixels, dark_cap=50, buffer=10):
    total = count = 0
    for v in pixels.ravel().tolist():
        if v < dark_cap:
            total += v
            count += 1
    if count == 0:
        return dark_cap + buffer, True
    return round(total / count) + buffer, False


class TestDynamicThreshold:
    def test_all_zero(self):
        assert dynamic_threshold_value(_gray(np.zeros((4, 4)))) == (10, False)

    def test_dark_mean(self):
        img = np.full((10, 10), 200, dtype=np.uint8)
        img[0, :3] = (10, 20, 30)
        assert dynamic_threshold_value(_gray(img)) == (30, False)

    def test_fallback(self):
        value, fallback = dynamic_threshold_value(_gray(np.full((5, 5), 120)))
        assert (value, fallback) == (60, True)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            img = rng.integers(0, 256, (32, 32), dtype=np.uint8)
            assert tuple(dynamic_threshold_value(_gray(img))) == brute_force_threshold(img)


class TestThresholdMask:
    def test_all_background_at_255(self):
        assert threshold_mask(_gray(np.full((3, 3), 255)), 255).area == 0

    def test_zero_threshold(self):
        img = np.array([[0, 200], [200, 0]], dtype=np.uint8)
        assert threshold_mask(_gray(img), 0).bits.tolist() == [[False, True], [True, False]]

    def test_boundary_is_background(self):
        assert threshold_mask(_gray(np.full((2, 2), 50)), 50).area == 0


class TestHsvInRange:
    def test_examples(self):
        px = np.array([[(0, 0, 150), (0, 50, 150), (0, 10, 90)]], dtype=np.uint8)
        out = hsv_in_range(RasterHSV(px))
        assert out.bits.tolist() == [[True, False, False]]

    def test_inclusive_bounds(self):
        px = np.array([[(255, 20, 200), (0, 0, 100)]], dtype=np.uint8)
        assert hsv_in_range(RasterHSV(px)).bits.all()


def flood_fill_components(bits):
    """Independent 8-connected labeling by explicit stack-based flood fill."""
    h, w = bits.shape
    labels = np.zeros((h, w), dtype=int)
    sizes = {}
    next_label = 0
    for sy in range(h):
        for sx in range(w):
            if not bits[sy, sx] or labels[sy, sx]:
                continue
            next_label += 1
            stack = [(sy, sx)]
            labels[sy, sx] = next_label
            count = 0
            while stack:
                y, x = stack.pop()
                count += 1
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and bits[ny, nx] and not labels[ny, nx]:
                            labels[ny, nx] = next_label
                            stack.append((ny, nx))
            sizes[next_label] = count
    return labels, sizes


def remove_small_oracle(bits, min_area):
    labels, sizes = flood_fill_components(bits)
    keep = {label for label, size in sizes.items() if size >= min_area}
    return np.isin(labels, list(keep)) & bits


class TestRemoveSmallComponents:
    def test_single_pixel(self):
        m = _mask(np.eye(3, dtype=bool) * [1, 0, 0])
        assert remove_small_components(_mask([[True, False], [False, False]]), 2).area == 0

    def test_boundary_kept(self):
        bits = np.zeros((10, 12), dtype=bool)
        bits[:10, :10] = True
        assert remove_small_components(_mask(bits), 100).area == 100

    def test_flood_fill_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            bits = rng.random((64, 64)) < 0.35
            min_area = int(rng.integers(1, 30))
            got = remove_small_components(Mask(bits), min_area)
            assert np.array_equal(got.bits, remove_small_oracle(bits, min_area))


class TestMorphClose:
    def test_empty(self):
        assert morph_close(Mask.zeros(30, 30)).area == 0

    def test_fills_interior_hole(self):
        bits = np.zeros((70, 70), dtype=bool)
        bits[10:60, 10:60] = True
        bits[30:35, 30:35] = False
        closed = morph_close(Mask(bits), StructuringElement(21, 21))
        assert closed.bits[30:35, 30:35].all()

    def test_idempotent_and_extensive(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            bits = rng.random((48, 48)) < 0.2
            se = StructuringElement(2 * int(rng.integers(1, 5)) + 1, 2 * int(rng.integers(1, 5)) + 1)
            once = morph_close(Mask(bits), se)
            assert (bits & ~once.bits).sum() == 0  # never shrinks
            assert np.array_equal(morph_close(once, se).bits, once.bits)

    def test_kernel_must_be_odd(self):
        with pytest.raises(ValueError):
            StructuringElement(20, 20)


class TestMaskAlgebra:
    def test_identities(self):
        rng = np.random.default_rng(8)
        m = Mask(rng.random((16, 16)) < 0.5)
        empty = Mask.zeros(16, 16)
        assert np.array_equal(union(m, empty).bits, m.bits)
        assert intersect(m, empty).area == 0
        assert np.array_equal(subtract(m, empty).bits, m.bits)
        assert subtract(m, m).area == 0

    def test_de_morgan(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            a = Mask(rng.random((32, 32)) < 0.5)
            b = Mask(rng.random((32, 32)) < 0.5)
            assert np.array_equal(
                complement(union(a, b)).bits,
                intersect(complement(a), complement(b)).bits,
            )
            assert np.array_equal(subtract(a, b).bits, intersect(a, complement(b)).bits)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            union(Mask.zeros(3, 3), Mask.zeros(4, 3))


def _flat_rgb(color, shape=(64, 64)):
    arr = np.zeros(shape + (3,), dtype=np.uint8)
    arr[:, :] = color
    return arr


class TestBackingMask:
    def test_shared_gray_patch_detected(self):
        recto = _flat_rgb((10, 10, 10))
        verso = _flat_rgb((10, 10, 10))
        recto[20:50, 20:50] = (150, 150, 150)
        verso[20:50, 20:50] = (150, 150, 150)
        out = backing_mask(RasterRGB(recto), RasterRGB(verso), min_area=1)
        assert out.bits[30, 30]
        assert not out.bits[5, 5]

    def test_recto_only_patch_excluded(self):
        recto = _flat_rgb((10, 10, 10))
        verso = _flat_rgb((10, 10, 10))
        recto[20:50, 20:50] = (150, 150, 150)
        out = backing_mask(RasterRGB(recto), RasterRGB(verso), min_area=1)
        assert out.area == 0

    def test_saturated_patch_excluded(self):
        recto = _flat_rgb((10, 10, 10))
        recto[20:50, 20:50] = (180, 60, 40)
        out = backing_mask(RasterRGB(recto), RasterRGB(recto.copy()), min_area=1)
        assert out.area == 0

    def test_default_range_values(self):
        r = HsvRange()
        assert r.lo == (0, 0, 100) and r.hi == (255, 20, 200)
