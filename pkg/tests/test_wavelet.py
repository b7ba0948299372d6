"""Transform correctness: exactness, energy preservation, packing layout."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waverestore.wavelet import (
    BandLayout,
    ImageGrid,
    WaveletSpectrum,
    apply_scale,
    default_gamma,
    dwt2,
    idwt2,
    merge_spectrum,
    split_spectrum,
)


def random_image(seed, h=32, w=32, c=3, dtype=np.float64):
    rng = np.random.default_rng(seed)
    data = rng.uniform(-1.0, 1.0, size=(h, w, c)).astype(dtype)
    return ImageGrid(data=data, value_range=(-1.0, 1.0))


class TestShapesAndLayout:
    def test_band_count_and_size_64x64x3_two_levels(self):
        img = random_image(0, 64, 64, 3)
        spec = dwt2(img, levels=2)
        assert spec.data.shape == (16, 16, 48)
        assert spec.layout.n_bands == 48

    @pytest.mark.parametrize("levels,c", [(1, 1), (1, 3), (2, 3), (3, 3)])
    def test_layout_contract(self, levels, c):
        lay = BandLayout(levels=levels, source_channels=c)
        order = lay.ordering
        assert len(order) == c * 4 ** levels
        # deepest LL occupies exactly the first c slots, and nothing else is LL
        assert order[:c] == tuple((levels, "LL", ch) for ch in range(c))
        assert all(sb != "LL" for (_, sb, _) in order[c:])
        # detail triples at level lv repeat once per packed polyphase sub-band
        for lv in range(1, levels + 1):
            for sb in ("LH", "HL", "HH"):
                for ch in range(c):
                    count = sum(1 for e in order if e == (lv, sb, ch))
                    assert count == 4 ** (levels - lv)

    def test_band_indices_selection(self):
        lay = BandLayout(levels=2, source_channels=3)
        assert list(lay.band_indices(subband="LL")) == [0, 1, 2]
        assert len(lay.band_indices(level=1)) == 36
        assert len(lay.band_indices(level=2)) == 12

    def test_layout_mismatch_rejected(self):
        lay = BandLayout(levels=2, source_channels=3)
        with pytest.raises(ValueError, match="bands"):
            WaveletSpectrum(layout=lay, data=np.zeros((8, 8, 12)))


class TestKnownValues:
    def test_constant_image_one_level(self):
        c = 0.37
        img = ImageGrid(np.full((8, 8, 1), c), value_range=(0.0, 1.0))
        spec = dwt2(img, levels=1)
        np.testing.assert_allclose(spec.data[:, :, 0], 2.0 * c, atol=1e-14)
        np.testing.assert_allclose(spec.data[:, :, 1:], 0.0, atol=1e-14)

    def test_constant_image_two_levels(self):
        c = -0.5
        img = ImageGrid(np.full((16, 16, 2), c), value_range=(-1.0, 1.0))
        spec = dwt2(img, levels=2)
        np.testing.assert_allclose(spec.data[:, :, :2], 4.0 * c, atol=1e-14)
        np.testing.assert_allclose(spec.data[:, :, 2:], 0.0, atol=1e-14)

    def test_2x2_block_hand_values(self):
        # [[1,3],[5,7]]: LL = 8, LH = -2, HL = -4, HH = 0 (detail energy 20)
        img = ImageGrid(np.array([[1.0, 3.0], [5.0, 7.0]])[:, :, None], value_range=(0.0, 8.0))
        spec = dwt2(img, levels=1)
        flat = spec.data[0, 0, :]
        assert flat[0] == pytest.approx(8.0, abs=1e-12)
        assert flat[1] == pytest.approx(-2.0, abs=1e-12)  # high-pass along rows
        assert flat[2] == pytest.approx(-4.0, abs=1e-12)  # high-pass along columns
        assert flat[3] == pytest.approx(0.0, abs=1e-12)
        assert float(np.sum(flat[1:] ** 2)) == pytest.approx(20.0, abs=1e-12)

    def test_default_gamma(self):
        assert default_gamma(2) == 0.25
        assert default_gamma(3) == 0.125


class TestRoundTrip:
    @pytest.mark.parametrize("levels", [1, 2, 3])
    def test_double_precision_round_trip(self, levels):
        img = random_image(7, 48, 48, 3)
        rec = idwt2(dwt2(img, levels))
        assert np.max(np.abs(rec.data - img.data)) < 1e-10
        assert rec.value_range == img.value_range

    @settings(max_examples=30, deadline=None)
    @given(
        seed=st.integers(0, 2 ** 31 - 1),
        levels=st.sampled_from([1, 2, 3]),
        h=st.sampled_from([8, 16, 24, 32]),
        w=st.sampled_from([8, 16, 40]),
        c=st.sampled_from([1, 3]),
    )
    def test_single_precision_round_trip(self, seed, levels, h, w, c):
        img = random_image(seed, h, w, c, dtype=np.float32)
        rec = idwt2(dwt2(img, levels))
        assert rec.data.dtype == np.float32
        assert np.max(np.abs(rec.data - img.data)) < 1e-5

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1), levels=st.sampled_from([1, 2, 3]))
    def test_energy_preserved(self, seed, levels):
        img = random_image(seed, 32, 32, 3)
        spec = dwt2(img, levels)
        e_img = float(np.sum(img.data ** 2))
        assert abs(spec.energy() - e_img) / e_img < 1e-6

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2 ** 31 - 1))
    def test_linearity(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(16, 16, 3))
        b = rng.normal(size=(16, 16, 3))
        alpha, beta = rng.normal(size=2)
        lhs = dwt2(ImageGrid(alpha * a + beta * b, (-10, 10)), 2).data
        rhs = alpha * dwt2(ImageGrid(a, (-10, 10)), 2).data + beta * dwt2(ImageGrid(b, (-10, 10)), 2).data
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_two_level_composes_one_level_plus_packing(self):
        img = random_image(11, 32, 32, 3)
        c = 3
        one = dwt2(img, 1)
        ll = one.data[:, :, :c]
        details = one.data[:, :, c:]
        inner = dwt2(ImageGrid(ll, (-4.0, 4.0)), 1).data
        packed = np.stack(
            [details[0::2, 0::2], details[0::2, 1::2], details[1::2, 0::2], details[1::2, 1::2]],
            axis=3,
        ).reshape(8, 8, 4 * 9)
        expected = np.concatenate([inner, packed], axis=2)
        np.testing.assert_allclose(dwt2(img, 2).data, expected, atol=1e-12)


class TestSplitMergeScale:
    def test_split_merge_round_trip(self):
        spec = dwt2(random_image(3, 32, 32, 3), 2)
        split = split_spectrum(spec, 3)
        assert split.low.shape == (8, 8, 3)
        assert split.high.shape == (8, 8, 45)
        merged = merge_spectrum(split)
        np.testing.assert_array_equal(merged.data, spec.data)
        assert merged.scale_applied == spec.scale_applied

    @pytest.mark.parametrize("bad", [0, 49, -1])
    def test_split_bounds(self, bad):
        spec = dwt2(random_image(3, 32, 32, 3), 2)
        with pytest.raises(ValueError):
            split_spectrum(spec, bad)

    def test_apply_scale_tracks_and_inverts(self):
        spec = dwt2(random_image(5, 32, 32, 3), 2)
        scaled = apply_scale(spec, 0.25)
        assert scaled.scale_applied == pytest.approx(0.25)
        np.testing.assert_allclose(scaled.data, spec.data * 0.25)
        back = apply_scale(scaled, 4.0)
        assert back.scale_applied == pytest.approx(1.0)
        np.testing.assert_allclose(back.data, spec.data, atol=1e-15)
        rec = idwt2(back)
        assert np.max(np.abs(rec.data - idwt2(spec).data)) < 1e-12


class TestErrors:
    def test_non_divisible_height_named(self):
        img = ImageGrid(np.zeros((30, 32, 3)), (0, 1))
        with pytest.raises(ValueError, match="height 30"):
            dwt2(img, 2)

    def test_non_divisible_width_named(self):
        img = ImageGrid(np.zeros((32, 20, 3)), (0, 1))
        with pytest.raises(ValueError, match="width 20"):
            dwt2(img, 3)

    def test_bad_levels(self):
        img = ImageGrid(np.zeros((32, 32, 3)), (0, 1))
        with pytest.raises(ValueError, match="levels"):
            dwt2(img, 0)

    def test_non_finite_image_rejected(self):
        data = np.zeros((8, 8, 1))
        data[0, 0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            ImageGrid(data, (0, 1))
