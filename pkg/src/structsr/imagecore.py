"""Planar floating-point images: luma conversion, bicubic resampling, Gaussian blur.

Images are stored channel-first, ``(C, H, W)`` float64, nominal range [0, 1].
Nothing in here clamps intensities; clamping happens only when writing files.
"""

from dataclasses import dataclass
import enum
import math

import numpy as np

BT601 = (0.299, 0.587, 0.114)


class ImageError(ValueError):
    """Raised for invalid image construction or operation parameters."""


@dataclass(frozen=True, eq=False)
class ImageBuf:
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[0] not in (1, 3):
            raise ImageError(f"expected (C, H, W) with C in {{1, 3}}, got shape {arr.shape}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ImageError(f"empty image of shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ImageError("image contains NaN or Inf")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_hwc(cls, arr):
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            return cls(arr[None])
        return cls(np.moveaxis(arr, -1, 0))

    def to_hwc(self):
        if self.channels == 1:
            return self.data[0].copy()
        return np.moveaxis(self.data, 0, -1).copy()

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def height(self):
        return self.data.shape[1]

    @property
    def width(self):
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        return f"ImageBuf({self.width}x{self.height}x{self.channels})"


class Kernel(enum.Enum):
    BICUBIC = "bicubic"
    NEAREST = "nearest"


@dataclass(frozen=True)
class ResampleKernel:
    kind: Kernel = Kernel.BICUBIC
    a: float = -0.5


BICUBIC = ResampleKernel()
NEAREST = ResampleKernel(Kernel.NEAREST)


def to_luma(img):
    """Return the 1-channel BT.601 full-range luma of ``img`` (a copy for grayscale)."""
    if img.channels == 1:
        return ImageBuf(img.data)
    r, g, b = img.data
    return ImageBuf((BT601[0] * r + BT601[1] * g + BT601[2] * b)[None])


def cubic_weight(x, a=-0.5):
    """Keys cubic convolution kernel; ``a = -0.5`` is Catmull-Rom."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2, x3 = x * x, x * x * x
    near = (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0
    far = a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a
    return np.where(x <= 1.0, near, np.where(x < 2.0, far, 0.0))


def resample_matrix(n_src, n_dst, kernel=BICUBIC):
    """Dense (n_dst, n_src) interpolation matrix for one axis.

    Pixel centers are aligned (``src = (dst + 0.5) * scale - 0.5``) and sample
    coordinates outside the source are clamped to the border.
    """
    scale = n_src / n_dst
    centers = (np.arange(n_dst) + 0.5) * scale - 0.5
    mat = np.zeros((n_dst, n_src))
    rows = np.arange(n_dst)
    if kernel.kind is Kernel.NEAREST:
        idx = np.clip(np.floor((np.arange(n_dst) + 0.5) * scale).astype(int), 0, n_src - 1)
        mat[rows, idx] = 1.0
        return mat
    base = np.floor(centers).astype(int)
    for off in (-1, 0, 1, 2):
        taps = base + off
        w = cubic_weight(centers - taps, kernel.a)
        np.add.at(mat, (rows, np.clip(taps, 0, n_src - 1)), w)
    return mat


def resize_array(arr, new_w, new_h, kernel=BICUBIC):
    """Separable resize of a ``(C, H, W)`` array, horizontal pass first."""
    if new_w < 1 or new_h < 1:
        raise ImageError(f"target size must be positive, got {new_w}x{new_h}")
    _, h, w = arr.shape
    mx = resample_matrix(w, new_w, kernel)
    my = resample_matrix(h, new_h, kernel)
    horiz = np.einsum("chw,xw->chx", arr, mx)
    return np.einsum("yh,chx->cyx", my, horiz)


def resize(img, new_w, new_h, kernel=BICUBIC):
    return ImageBuf(resize_array(img.data, new_w, new_h, kernel))


def gaussian_taps(sigma):
    """Normalized 1-D Gaussian taps with radius ``ceil(3 * sigma)``."""
    if not sigma > 0:
        raise ImageError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-0.5 * (x / sigma) ** 2)
    return taps / taps.sum()


def _correlate_axis(arr, taps, axis):
    radius = len(taps) // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    n = arr.shape[axis]
    out = np.zeros_like(arr)
    for k, w in enumerate(taps):
        out += w * np.take(padded, np.arange(k, k + n), axis=axis)
    return out


def blur_array(arr, sigma):
    """Clamp-to-edge separable Gaussian blur over the last two axes."""
    taps = gaussian_taps(sigma)
    return _correlate_axis(_correlate_axis(arr, taps, -1), taps, -2)


def gaussian_blur(img, sigma):
    return ImageBuf(blur_array(img.data, sigma))


def center_crop(img, size):
    if size > img.width or size > img.height:
        raise ImageError(f"crop {size} larger than image {img.width}x{img.height}")
    top = (img.height - size) // 2
    left = (img.width - size) // 2
    return ImageBuf(img.data[:, top:top + size, left:left + size])
