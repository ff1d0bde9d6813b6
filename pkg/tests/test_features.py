import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gdpkit.descriptors import (
    Neighborhood,
    gdp_code,
    kirsch_responses,
    lbp_code,
    lbp_uniform_bin,
    uniform_bin,
)
from gdpkit.features import (
    DescriptorKind,
    block_grid,
    block_histograms,
    extract_codes,
    feature_length,
    feature_vector,
)
from gdpkit.imagecore import GrayImage

GDP, LBP, LBP_U = DescriptorKind.GDP, DescriptorKind.LBP, DescriptorKind.LBP_U


def naive_histograms(pixels, kind, n):
    """Per-block histograms by a plain double loop over scalar descriptors."""
    h, w = pixels.shape
    rows = [i * h // n for i in range(n + 1)]
    cols = [j * w // n for j in range(n + 1)]
    hist = np.zeros((n * n, kind.bins), dtype=np.int64)
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            nb = Neighborhood.from_patch(pixels[r - 1:r + 2, c - 1:c + 2].astype(int))
            if kind is GDP:
                b = uniform_bin(gdp_code(kirsch_responses(nb)))
            elif kind is LBP:
                b = lbp_code(nb)
            else:
                b = lbp_uniform_bin(lbp_code(nb))
            if b is None:
                continue
            bi = max(i for i in range(n) if rows[i] <= r)
            bj = max(j for j in range(n) if cols[j] <= c)
            hist[bi * n + bj, b] += 1
    return hist


def rand_image(seed, h, w):
    return GrayImage(np.random.default_rng(seed).integers(0, 256, (h, w), dtype=np.uint8))


class TestBlockGrid:
    def test_exact_division(self):
        g = block_grid(81, 81, 9)
        assert np.diff(g.row_bounds).tolist() == [9] * 9
        assert np.diff(g.col_bounds).tolist() == [9] * 9

    def test_floor_bounds(self):
        assert block_grid(10, 10, 3).col_bounds == (0, 3, 6, 10)

    def test_single_block(self):
        g = block_grid(17, 5, 1)
        assert g.row_bounds == (0, 5) and g.col_bounds == (0, 17)

    def test_width_before_height(self):
        g = block_grid(10, 7, 2)
        assert g.col_bounds[-1] == 10 and g.row_bounds[-1] == 7

    @given(st.integers(1, 200), st.integers(1, 200), st.integers(1, 30))
    def test_bounds_invariants(self, w, h, n):
        if w < n or h < n:
            with pytest.raises(ValueError):
                block_grid(w, h, n)
            return
        g = block_grid(w, h, n)
        for bounds, dim in ((g.row_bounds, h), (g.col_bounds, w)):
            spans = np.diff(bounds)
            assert bounds[0] == 0 and bounds[-1] == dim
            assert (spans > 0).all() and spans.max() - spans.min() <= 1

    def test_invalid(self):
        with pytest.raises(ValueError):
            block_grid(5, 5, 0)
        with pytest.raises(ValueError):
            block_grid(4, 9, 5)


class TestExtractCodes:
    def test_worked_region_gdp(self, backend):
        img = GrayImage(np.array([[20, 52, 63], [59, 78, 45], [25, 48, 71]]))
        assert extract_codes(img, GDP).tolist() == [[3]]

    def test_worked_region_lbp(self, backend):
        img = GrayImage(np.array([[56, 89, 45], [54, 56, 25], [48, 89, 26]]))
        assert extract_codes(img, LBP).tolist() == [[196]]

    def test_constant_image(self, backend):
        codes = extract_codes(GrayImage(np.full((5, 5), 9)), GDP)
        assert codes.shape == (3, 3) and (codes == 15).all()

    def test_too_small(self, backend):
        with pytest.raises(ValueError):
            extract_codes(GrayImage(np.zeros((2, 5))), GDP)

    def test_matches_scalar_kernels(self, backend):
        img = rand_image(3, 12, 15)
        p = img.pixels.astype(int)
        gdp, lbp = extract_codes(img, GDP), extract_codes(img, LBP)
        for r in range(1, 11):
            for c in range(1, 14):
                nb = Neighborhood.from_patch(p[r - 1:r + 2, c - 1:c + 2])
                assert gdp[r - 1, c - 1] == gdp_code(kirsch_responses(nb))
                assert lbp[r - 1, c - 1] == lbp_code(nb)


class TestFeatureVector:
    @pytest.mark.parametrize("n, length", [(5, 200), (7, 392), (9, 648), (11, 968), (13, 1352)])
    def test_gdp_lengths(self, n, length, backend):
        fv = feature_vector(rand_image(n, 90, 90), GDP, n)
        assert len(fv) == length == feature_length(GDP, n)

    def test_bins_per_kind(self):
        assert (GDP.bins, LBP.bins, LBP_U.bins) == (8, 256, 59)
        assert GDP.bins == 16 // 2

    def test_constant_image(self, backend):
        fv = feature_vector(GrayImage(np.full((90, 90), 100)), GDP, 9)
        assert (fv.blocks() == np.eye(8)[7]).all()

    @pytest.mark.parametrize("kind", list(DescriptorKind))
    def test_block_slices_sum_to_one_or_zero(self, kind, backend):
        fv = feature_vector(rand_image(1, 40, 33), kind, 6)
        sums = fv.blocks().sum(axis=1)
        assert np.all((np.abs(sums - 1) < 1e-9) | (sums == 0))
        assert ((fv.values >= 0) & (fv.values <= 1)).all()

    def test_empty_block_is_zero(self, backend):
        # 3x3 image with n=2: only the centre pixel is interior, so three blocks get nothing
        img = GrayImage(np.arange(9).reshape(3, 3))
        blocks = feature_vector(img, LBP, 2).blocks()
        assert blocks.sum(axis=1).tolist() == [0.0, 0.0, 0.0, 1.0]

    def test_lbp_single_block_length(self, backend):
        assert len(feature_vector(rand_image(2, 20, 20), LBP, 1)) == 256

    @given(arrays(np.uint8, (20, 20)), st.integers(-255, 255))
    @settings(max_examples=50, deadline=None)
    def test_brightness_shift_invariance(self, pixels, delta):
        lo, hi = int(pixels.min()), int(pixels.max())
        delta = max(-lo, min(delta, 255 - hi))
        a = feature_vector(GrayImage(pixels), GDP, 3).values
        b = feature_vector(GrayImage(pixels.astype(int) + delta), GDP, 3).values
        assert np.array_equal(a, b)

    def test_block_independence(self, backend):
        # changing pixels deep inside one block leaves every other block untouched
        img = rand_image(4, 30, 30)
        p = img.pixels.copy()
        p[12:18, 12:18] = 255 - p[12:18, 12:18]
        a = feature_vector(img, GDP, 3).blocks()
        b = feature_vector(GrayImage(p), GDP, 3).blocks()
        changed = [i for i in range(9) if not np.array_equal(a[i], b[i])]
        assert changed == [4]

    @pytest.mark.parametrize("kind", list(DescriptorKind))
    def test_matches_naive_double_loop(self, kind, backend):
        rng = np.random.default_rng(kind.bins)
        for _ in range(10):
            h, w = rng.integers(3, 21, size=2)
            n = int(rng.integers(1, min(h, w) + 1))
            img = GrayImage(rng.integers(0, 256, (h, w), dtype=np.uint8))
            assert np.array_equal(block_histograms(img, kind, n), naive_histograms(img.pixels, kind, n))

    def test_kind_parse(self):
        assert DescriptorKind.parse("lbp-u") is LBP_U
        with pytest.raises(ValueError):
            DescriptorKind.parse("LDP")
