import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from structsr.imagecore import (BICUBIC, NEAREST, ImageBuf, ImageError, center_crop, cubic_weight,
                                gaussian_blur, gaussian_taps, resample_matrix, resize, to_luma)

import oracles


def rgb(r, g, b):
    return ImageBuf(np.array([[[r]], [[g]], [[b]]], dtype=float))


def test_imagebuf_rejects_nonfinite_and_bad_channels():
    with pytest.raises(ImageError):
        ImageBuf(np.array([[[np.nan]]]))
    with pytest.raises(ImageError):
        ImageBuf(np.zeros((2, 4, 4)))
    img = ImageBuf(np.zeros((1, 3, 5)))
    assert (img.width, img.height, img.channels) == (5, 3, 1)
    assert not img.data.flags.writeable


def test_imagebuf_hwc_roundtrip():
    arr = np.random.default_rng(0).random((6, 7, 3))
    img = ImageBuf.from_hwc(arr)
    assert img.shape == (3, 6, 7)
    np.testing.assert_array_equal(img.to_hwc(), arr)


@pytest.mark.parametrize("pixel,expected", [((1, 1, 1), 1.0), ((0, 0, 0), 0.0), ((1, 0, 0), 0.299),
                                            ((0, 1, 0), 0.587), ((0, 0, 1), 0.114)])
def test_luma_coefficients(pixel, expected):
    assert to_luma(rgb(*pixel)).data[0, 0, 0] == pytest.approx(expected, abs=1e-12)


def test_luma_idempotent_on_gray():
    g = ImageBuf(np.random.default_rng(1).random((1, 5, 5)))
    once = to_luma(g)
    np.testing.assert_array_equal(once.data, g.data)
    np.testing.assert_array_equal(to_luma(once).data, once.data)


def test_cubic_weight_catmull_rom_values():
    # hand-evaluated Catmull-Rom taps
    assert cubic_weight(0.25) == pytest.approx(0.8671875)
    assert cubic_weight(0.75) == pytest.approx(0.2265625)
    assert cubic_weight(1.25) == pytest.approx(-0.0703125)
    assert cubic_weight(1.75) == pytest.approx(-0.0234375)
    assert cubic_weight(2.0) == 0.0


@pytest.mark.parametrize("n_src,n_dst", [(4, 4), (8, 3), (3, 11), (16, 4), (5, 10)])
def test_resample_rows_partition_of_unity(n_src, n_dst):
    m = resample_matrix(n_src, n_dst, BICUBIC)
    np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("w,h", [(1, 1), (7, 3), (16, 16), (33, 20)])
def test_resize_constant(w, h):
    img = ImageBuf(np.full((3, 8, 10), 0.5))
    out = resize(img, w, h)
    assert (out.width, out.height) == (w, h)
    np.testing.assert_allclose(out.data, 0.5, atol=1e-6)


def test_resize_identity_scale():
    img = ImageBuf(np.random.default_rng(2).random((1, 4, 4)))
    np.testing.assert_allclose(resize(img, 4, 4).data, img.data, atol=1e-6)


def test_checkerboard_upscale_matches_direct_oracle():
    board = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = resize(ImageBuf(board[None]), 4, 4).data[0]
    np.testing.assert_allclose(out, oracles.bicubic_direct(board, 4, 4), atol=1e-12)
    # corner pixel by hand: clamped taps give column weights (1.0703125, -0.0703125)
    assert out[0, 0] == pytest.approx(-2 * 1.0703125 * 0.0703125, abs=1e-12)


@pytest.mark.parametrize("src,dst", [((9, 7), (4, 13)), ((16, 16), (4, 4)), ((5, 6), (15, 12))])
def test_resize_matches_direct_oracle(src, dst):
    plane = np.random.default_rng(3).random(src[::-1])
    out = resize(ImageBuf(plane[None]), *dst).data[0]
    np.testing.assert_allclose(out, oracles.bicubic_direct(plane, *dst), atol=1e-12)


def test_resize_preserves_mean_of_smooth_image():
    y, x = np.mgrid[0:128, 0:128] / 128.0
    plane = 0.5 + 0.3 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
    img = ImageBuf(plane[None])
    for w, h in [(64, 64), (32, 48), (200, 160)]:
        m = resize(img, w, h).data.mean()
        assert abs(m - plane.mean()) / plane.mean() < 1e-2


def test_nearest_picks_source_pixels():
    plane = np.arange(16, dtype=float).reshape(4, 4)
    out = resize(ImageBuf(plane[None]), 2, 2, NEAREST).data[0]
    assert set(out.ravel()) <= set(plane.ravel())


def test_gaussian_taps():
    taps = gaussian_taps(1.0)
    assert len(taps) == 7
    assert taps.sum() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ImageError):
        gaussian_taps(0.0)
    with pytest.raises(ImageError):
        gaussian_blur(ImageBuf(np.zeros((1, 4, 4))), -1.0)


def test_blur_impulse_matches_2d_oracle():
    plane = np.zeros((15, 15))
    plane[7, 7] = 1.0
    out = gaussian_blur(ImageBuf(plane[None]), 1.0).data[0]
    k = oracles.gaussian_kernel_2d(1.0)
    expected = np.zeros_like(plane)
    expected[4:11, 4:11] = k
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_blur_matches_clamped_oracle_near_edges():
    plane = np.random.default_rng(4).random((9, 12))
    out = gaussian_blur(ImageBuf(plane[None]), 1.3).data[0]
    np.testing.assert_allclose(out, oracles.convolve_clamped(plane, oracles.gaussian_kernel_2d(1.3)), atol=1e-12)


def test_blur_tiny_sigma_near_identity():
    img = ImageBuf(np.random.default_rng(5).random((3, 16, 16)))
    assert np.max(np.abs(gaussian_blur(img, 0.1).data - img.data)) < 1e-3


def test_blur_constant():
    img = ImageBuf(np.full((1, 10, 10), 0.42))
    np.testing.assert_allclose(gaussian_blur(img, 2.5).data, 0.42, atol=1e-6)


def test_center_crop_offset():
    plane = np.arange(512 * 512, dtype=float).reshape(512, 512) / (512 * 512)
    out = center_crop(ImageBuf(plane[None]), 128)
    assert out.shape == (1, 128, 128)
    assert out.data[0, 0, 0] == plane[192, 192]
    with pytest.raises(ImageError):
        center_crop(ImageBuf(plane[None, :64, :64]), 128)


images = arrays(np.float64, st.tuples(st.sampled_from([1, 3]), st.integers(2, 12), st.integers(2, 12)),
                elements=st.floats(0, 1))


@settings(max_examples=40, deadline=None)
@given(images, st.integers(1, 20), st.integers(1, 20))
def test_resize_pure_and_shaped(arr, w, h):
    img = ImageBuf(arr)
    a, b = resize(img, w, h), resize(img, w, h)
    assert a.shape == (arr.shape[0], h, w)
    np.testing.assert_array_equal(a.data, b.data)


@settings(max_examples=40, deadline=None)
@given(images, st.floats(0.2, 3.0))
def test_blur_stays_within_range(arr, sigma):
    out = gaussian_blur(ImageBuf(arr), sigma).data
    assert out.min() >= arr.min() - 1e-12 and out.max() <= arr.max() + 1e-12
