import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gdpkit.imagecore import (
    GrayImage,
    NoiseSpec,
    PgmDimensionError,
    PgmMagicError,
    PgmMaxvalError,
    PgmTruncatedError,
    SyntheticSpec,
    add_gaussian_noise,
    load_pgm,
    make_synthetic_textures,
    round_half_away,
    save_pgm,
)

images = st.integers(1, 24).flatmap(
    lambda h: st.integers(1, 24).flatmap(
        lambda w: arrays(np.uint8, (h, w)).map(GrayImage)
    )
)


class TestPgm:
    def test_decode_minimal(self):
        img = load_pgm(b"P5 2 2 255\n" + bytes([0, 255, 7, 9]))
        assert (img.width, img.height) == (2, 2)
        assert img.flat() == [0, 255, 7, 9]

    def test_header_comments(self):
        data = b"P5\n# made by hand\n2 # width\n1\n# maxval next\n255\n" + bytes([3, 4])
        assert load_pgm(data).flat() == [3, 4]

    def test_color_magic_rejected(self):
        with pytest.raises(PgmMagicError):
            load_pgm(b"P6 1 1 255\n" + bytes(3))

    def test_ascii_magic_rejected(self):
        with pytest.raises(PgmMagicError):
            load_pgm(b"P2 1 1 255\n7\n")

    def test_truncated_payload(self):
        with pytest.raises(PgmTruncatedError):
            load_pgm(b"P5 3 3 255\n" + bytes(8))

    def test_truncated_header(self):
        with pytest.raises(PgmTruncatedError):
            load_pgm(b"P5 3 3")

    def test_maxval_other_than_255(self):
        with pytest.raises(PgmMaxvalError):
            load_pgm(b"P5 1 1 65535\n" + bytes(2))

    @pytest.mark.parametrize("dims", [b"0 3", b"3 0", b"-1 2"])
    def test_zero_dimensions(self, dims):
        with pytest.raises(PgmDimensionError):
            load_pgm(b"P5 " + dims + b" 255\n")

    def test_error_classes_are_distinct(self):
        classes = {PgmMagicError, PgmMaxvalError, PgmTruncatedError, PgmDimensionError}
        assert len(classes) == 4
        for a in classes:
            for b in classes - {a}:
                assert not issubclass(a, b)

    def test_single_pixel_round_trip(self):
        assert load_pgm(save_pgm(GrayImage([[42]]))).flat() == [42]

    def test_width_before_height(self):
        data = save_pgm(GrayImage(np.zeros((3, 2), dtype=np.uint8)))
        assert data.startswith(b"P5\n2 3\n255\n")

    def test_random_16x16_round_trip(self):
        img = GrayImage(np.random.default_rng(5).integers(0, 256, (16, 16), dtype=np.uint8))
        assert load_pgm(save_pgm(img)) == img

    @given(images)
    @settings(max_examples=200)
    def test_round_trip_property(self, img):
        assert load_pgm(save_pgm(img)) == img

    def test_payload_may_start_with_whitespace_byte(self):
        # pixel value 10 is '\n'; only one separator byte is consumed
        img = GrayImage([[10, 32]])
        assert load_pgm(save_pgm(img)) == img


class TestGrayImage:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayImage([[0, 256]])
        with pytest.raises(ValueError):
            GrayImage([[-1]])

    def test_immutable(self):
        img = GrayImage([[1, 2]])
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 9

    def test_from_sequence_length_check(self):
        with pytest.raises(ValueError):
            GrayImage.from_sequence(2, 2, [1, 2, 3])


class TestNoise:
    def test_zero_variance_zero_mean_is_identity(self):
        img = GrayImage(np.random.default_rng(1).integers(0, 256, (32, 32), dtype=np.uint8))
        assert add_gaussian_noise(img, NoiseSpec(0.0, 0.0, 3)) == img

    def test_statistics_on_constant_image(self):
        img = GrayImage(np.full((256, 256), 128, dtype=np.uint8))
        out = add_gaussian_noise(img, NoiseSpec(0.0, 0.001, 11))
        diff = out.pixels.astype(float) - 128
        expected_std = math.sqrt(0.001) * 255
        assert abs(diff.mean()) <= 0.5
        assert abs(diff.std() - expected_std) <= 0.15 * expected_std

    def test_saturation(self):
        img = GrayImage([[255, 0]])
        out = add_gaussian_noise(img, NoiseSpec(0.5, 0.0, 0))
        assert out.flat() == [255, 128]

    def test_deterministic(self):
        img = GrayImage(np.random.default_rng(2).integers(0, 256, (20, 20), dtype=np.uint8))
        spec = NoiseSpec(0.0, 0.01, 99)
        assert add_gaussian_noise(img, spec) == add_gaussian_noise(img, spec)
        assert add_gaussian_noise(img, spec) != add_gaussian_noise(img, NoiseSpec(0.0, 0.01, 100))

    def test_negative_variance_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(0.0, -1e-9, 0)

    @given(images, st.floats(-1, 1), st.floats(0, 1), st.integers(0, 2**64 - 1))
    @settings(max_examples=100)
    def test_output_in_range(self, img, mean, var, seed):
        out = add_gaussian_noise(img, NoiseSpec(mean, var, seed))
        assert out.pixels.dtype == np.uint8 and out.pixels.shape == img.pixels.shape

    def test_round_half_away_from_zero(self):
        assert round_half_away([0.5, 1.5, 2.5, -0.5, -2.5, 2.4]).tolist() == [1, 2, 3, -1, -3, 2]


class TestSynthetic:
    def test_counts_and_labels(self):
        samples = make_synthetic_textures(SyntheticSpec(3, 16, 4, 0.1, 1))
        assert [s.label for s in samples] == ["A"] * 3 + ["B"] * 3
        assert all((s.image.width, s.image.height) == (16, 16) for s in samples)

    def test_no_jitter_orientation(self):
        a, b = make_synthetic_textures(SyntheticSpec(1, 32, 8, 0.0, 4))
        pa, pb = a.image.pixels, b.image.pixels
        assert (pa == pa[:, :1]).all()  # class A rows are constant
        assert (pb == pb[:1, :]).all()  # class B columns are constant
        assert len(np.unique(pa[:, 0])) > 1 and len(np.unique(pb[0])) > 1

    def test_construction_formula(self):
        spec = SyntheticSpec(1, 32, 8, 0.0, 21)
        a = make_synthetic_textures(spec)[0].image.pixels
        phase = np.random.default_rng(21).uniform(0.0, 8)
        for y in range(32):
            v = 255 * (0.5 + 0.25 * math.sin(2 * math.pi * (y + phase) / 8))
            assert a[y, 5] == math.floor(v + 0.5)

    def test_deterministic(self):
        spec = SyntheticSpec(4, 24, 6, 0.2, 8)
        a = make_synthetic_textures(spec)
        b = make_synthetic_textures(spec)
        assert all(x.image == y.image and x.label == y.label for x, y in zip(a, b))

    @pytest.mark.parametrize("kw", [
        {"grating_period": 1}, {"grating_period": 17, "image_size": 32},
        {"jitter_amplitude": 0.6}, {"images_per_class": 0},
    ])
    def test_invalid_spec(self, kw):
        with pytest.raises(ValueError):
            SyntheticSpec(**kw)
