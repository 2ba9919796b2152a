"""LR synthesis from HR ground truth: Gaussian blur -> bicubic downsample -> JPEG."""

from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .imagecore import BICUBIC, ImageBuf, ImageError, blur_array, resize_array

# ITU-T T.81 Annex K, Table K.1 (luminance).
LUMA_QTABLE = np.array([
    [16, 11, 10, 16, 24, 40, 51, 61],
    [12, 12, 14, 19, 26, 58, 60, 55],
    [14, 13, 16, 24, 40, 57, 69, 56],
    [14, 17, 22, 29, 51, 87, 80, 62],
    [18, 22, 37, 56, 68, 109, 103, 77],
    [24, 35, 55, 64, 81, 104, 113, 92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103, 99],
], dtype=np.float64)


@dataclass(frozen=True)
class DegradationSpec:
    scale_factor: int = 4
    blur_sigma: float = 0.0
    jpeg_quality: Optional[int] = None

    def __post_init__(self):
        if int(self.scale_factor) != self.scale_factor or self.scale_factor < 1:
            raise ImageError(f"scale_factor must be an integer >= 1, got {self.scale_factor}")
        if self.blur_sigma < 0:
            raise ImageError(f"blur_sigma must be >= 0, got {self.blur_sigma}")
        if self.jpeg_quality is not None and not 1 <= self.jpeg_quality <= 100:
            raise ImageError(f"jpeg_quality must be in [1, 100], got {self.jpeg_quality}")

    @property
    def label(self):
        """Short stage label in D / D + B / D + B + J form."""
        parts = ["D"]
        if self.blur_sigma > 0:
            parts.append("B")
        if self.jpeg_quality is not None:
            parts.append("J")
        return " + ".join(parts)

    def to_dict(self):
        return asdict(self)


def quant_table(quality):
    """Annex-K luminance table scaled by the IJG quality mapping."""
    if not 1 <= quality <= 100:
        raise ImageError(f"jpeg quality must be in [1, 100], got {quality}")
    scale = 5000.0 / quality if quality < 50 else 200.0 - 2.0 * quality
    return np.clip(np.floor((LUMA_QTABLE * scale + 50.0) / 100.0), 1.0, 255.0)


def dct_matrix(n=8):
    """Orthonormal DCT-II basis, rows are frequencies."""
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    mat = np.cos(np.pi * (2 * x + 1) * k / (2 * n)) * np.sqrt(2.0 / n)
    mat[0] /= np.sqrt(2.0)
    return mat


_DCT = dct_matrix()


def jpeg_roundtrip_array(arr, quality):
    """Quantize/dequantize 8x8 DCT blocks of every channel of a (C, H, W) array.

    No chroma subsampling and no entropy coding: this reproduces JPEG's
    distortion, not its bitstream.
    """
    q = quant_table(quality)
    c, h, w = arr.shape
    ph, pw = -h % 8, -w % 8
    padded = np.pad(arr * 255.0 - 128.0, ((0, 0), (0, ph), (0, pw)), mode="edge")
    H, W = padded.shape[1:]
    blocks = padded.reshape(c, H // 8, 8, W // 8, 8).transpose(0, 1, 3, 2, 4)
    coef = _DCT @ blocks @ _DCT.T
    coef = np.round(coef / q) * q
    rec = _DCT.T @ coef @ _DCT
    rec = rec.transpose(0, 1, 3, 2, 4).reshape(c, H, W)[:, :h, :w]
    return (rec + 128.0) / 255.0


def jpeg_roundtrip(img, quality):
    return ImageBuf(jpeg_roundtrip_array(img.data, quality))


def degrade(hr, spec, seed=0):
    """Synthesize an LR image from ``hr``.

    ``seed`` is accepted for interface stability; every current stage is
    deterministic.
    """
    s = spec.scale_factor
    if hr.width % s or hr.height % s:
        raise ImageError(f"{hr.width}x{hr.height} not divisible by scale factor {s}")
    arr = hr.data
    if spec.blur_sigma > 0:
        arr = blur_array(arr, spec.blur_sigma)
    if s > 1:
        arr = resize_array(arr, hr.width // s, hr.height // s, BICUBIC)
    if spec.jpeg_quality is not None:
        arr = jpeg_roundtrip_array(arr, spec.jpeg_quality)
    return ImageBuf(arr)
