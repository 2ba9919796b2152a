import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from structsr.degrade import DegradationSpec, LUMA_QTABLE, degrade, jpeg_roundtrip, quant_table
from structsr.harness.corpus import synthetic_corpus, synthetic_image
from structsr.imagecore import ImageBuf, ImageError, gaussian_blur, resize
from structsr.metrics import ssim

import oracles


def ramp(w=32, h=24):
    y, x = np.mgrid[0:h, 0:w]
    return ImageBuf(np.stack([x / w, y / h, (x + y) / (w + h)]))


def test_spec_validation_and_labels():
    with pytest.raises(ImageError):
        DegradationSpec(scale_factor=0)
    with pytest.raises(ImageError):
        DegradationSpec(blur_sigma=-1)
    with pytest.raises(ImageError):
        DegradationSpec(jpeg_quality=101)
    assert DegradationSpec(4).label == "D"
    assert DegradationSpec(4, 1.0).label == "D + B"
    assert DegradationSpec(4, 1.0, 50).label == "D + B + J"


@pytest.mark.parametrize("quality,expected", [
    (50, LUMA_QTABLE[0, :3]),         # scale 100: the base table
    (10, [80, 55, 50]),               # scale 500
    (90, [3, 2, 2]),                  # scale 20: 3.2, 2.2, 2.0
    (75, [8, 6, 5]),                  # scale 50: 8, 5.5 rounds up, 5
    (100, [1, 1, 1]),                 # scale 0, clamped to 1
])
def test_quant_table_ijg_mapping(quality, expected):
    np.testing.assert_array_equal(quant_table(quality)[0, :3], expected)


def test_quant_table_range():
    for q in (1, 5, 25, 60, 99):
        t = quant_table(q)
        assert t.min() >= 1 and t.max() <= 255
    with pytest.raises(ImageError):
        quant_table(0)


def test_identity_pipeline():
    img = ramp()
    np.testing.assert_allclose(degrade(img, DegradationSpec(1)).data, img.data, atol=1e-6)


def test_dimension_contract():
    hr = ImageBuf(np.random.default_rng(0).random((3, 512, 512)))
    assert degrade(hr, DegradationSpec(4)).shape == (3, 128, 128)
    with pytest.raises(ImageError):
        degrade(ImageBuf(np.zeros((1, 30, 32))), DegradationSpec(4))


def test_composition_of_stage_oracles():
    hr = ramp(32, 32)
    out = degrade(hr, DegradationSpec(2, 1.2, 50)).data
    k = oracles.gaussian_kernel_2d(1.2)
    q = quant_table(50)
    for c in range(3):
        blurred = oracles.convolve_clamped(hr.data[c], k)
        small = oracles.bicubic_direct(blurred, 16, 16)
        np.testing.assert_allclose(out[c], oracles.jpeg_block_roundtrip(small, q), atol=1e-9)


@pytest.mark.parametrize("quality", [10, 50, 90])
def test_jpeg_matches_block_oracle_on_unaligned_size(quality):
    plane = np.random.default_rng(quality).random((13, 21))
    out = jpeg_roundtrip(ImageBuf(plane[None]), quality).data[0]
    np.testing.assert_allclose(out, oracles.jpeg_block_roundtrip(plane, quant_table(quality)), atol=1e-9)


def test_jpeg_q100_error_bounds():
    # Unit steps bound every coefficient error by 0.5; the orthonormal inverse
    # keeps that as an RMS bound. The per-pixel max can exceed one level.
    rng = np.random.default_rng(0)
    imgs = [ImageBuf(rng.random((3, 37, 29))) for _ in range(5)] + [img for _, img in synthetic_corpus(3)]
    for img in imgs:
        err = (jpeg_roundtrip(img, 100).data - img.data) * 255
        assert np.sqrt(np.mean(err ** 2)) <= 0.5
        assert np.abs(err).max() < 2.0


@pytest.mark.parametrize("quality", [1, 10, 50, 100])
def test_jpeg_constant_image_stays_constant(quality):
    img = ImageBuf(np.full((1, 16, 24), 0.3))
    out = jpeg_roundtrip(img, quality).data
    assert np.ptp(out) < 1e-6
    # only the DC coefficient is nonzero; it moves by at most half its step
    assert abs(out.mean() - 0.3) <= quant_table(quality)[0, 0] / 16 / 255 + 1e-12


def test_jpeg_quality_ordering():
    img = synthetic_image(64, 3)
    assert ssim(jpeg_roundtrip(img, 10), img) < ssim(jpeg_roundtrip(img, 90), img)


def test_severity_monotone_on_corpus():
    for _, hr in synthetic_corpus(4):
        ref = resize(hr, 32, 32)
        by_q = [ssim(degrade(hr, DegradationSpec(2, 0.0, q)), ref) for q in (95, 80, 60, 40, 20, 5)]
        assert all(b <= a + 1e-4 for a, b in zip(by_q, by_q[1:]))
        by_s = [ssim(degrade(hr, DegradationSpec(2, s)), ref) for s in (0.0, 0.5, 1.0, 2.0, 3.0)]
        assert all(b <= a + 1e-4 for a, b in zip(by_s, by_s[1:]))


def test_blur_then_downsample_order():
    hr = synthetic_image(32, 1)
    out = degrade(hr, DegradationSpec(2, 1.0)).data
    np.testing.assert_allclose(out, resize(gaussian_blur(hr, 1.0), 16, 16).data, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([1, 2, 4]), st.sampled_from([0.0, 0.7, 1.6]),
       st.sampled_from([None, 20, 75]))
def test_degrade_deterministic(seed, scale, sigma, quality):
    hr = ImageBuf(np.random.default_rng(seed).random((1, 16, 16)))
    spec = DegradationSpec(scale, sigma, quality)
    a, b = degrade(hr, spec, seed), degrade(hr, spec, seed + 1)
    np.testing.assert_array_equal(a.data, b.data)
    assert a.shape == (1, 16 // scale, 16 // scale)
