"""Full-reference metrics on luma: windowed SSIM, PSNR, and the per-step S_t score."""

from dataclasses import dataclass, field
import csv
import io
import math
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .imagecore import BICUBIC, ImageError, gaussian_taps, resize, to_luma

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
GLOBAL = "global"


@dataclass(frozen=True)
class SsimParams:
    """SSIM configuration on a [0, 1] dynamic range.

    ``window`` is ``"gaussian"`` (``size`` taps, std ``sigma``), ``"uniform"``
    (``size`` x ``size`` box) or ``"global"`` (one window over the whole image,
    i.e. the single-statistic textbook formula).
    """

    window: str = GAUSSIAN
    size: int = 11
    sigma: float = 1.5
    c1: float = 0.01 ** 2
    c2: float = 0.03 ** 2

    def __post_init__(self):
        if self.window not in (GAUSSIAN, UNIFORM, GLOBAL):
            raise ImageError(f"unknown SSIM window {self.window!r}")
        if self.window != GLOBAL and (self.size < 1 or self.size % 2 == 0):
            raise ImageError(f"SSIM window size must be odd and positive, got {self.size}")
        if not (self.c1 > 0 and self.c2 > 0):
            raise ImageError("SSIM constants must be positive")

    def taps(self, limit):
        """1-D window taps, shrunk to the largest odd size <= ``limit``."""
        size = min(self.size, limit if limit % 2 else limit - 1)
        if self.window == UNIFORM:
            return np.full(size, 1.0 / size)
        taps = gaussian_taps(self.sigma)
        cut = (len(taps) - size) // 2
        if cut > 0:
            taps = taps[cut:len(taps) - cut]
        elif cut < 0:
            taps = np.pad(taps, -cut)
        return taps / taps.sum()


DEFAULT_SSIM = SsimParams()


def _valid_filter(plane, taps):
    k = len(taps)
    rows = sliding_window_view(plane, k, axis=1) @ taps
    return sliding_window_view(rows, k, axis=0) @ taps


def _check_pair(x, y):
    if (x.width, x.height) != (y.width, y.height):
        raise ImageError(f"size mismatch: {x.width}x{x.height} vs {y.width}x{y.height}")


def ssim_map(x, y, params=DEFAULT_SSIM):
    _check_pair(x, y)
    a = to_luma(x).data[0]
    b = to_luma(y).data[0]
    c1, c2 = params.c1, params.c2
    if params.window == GLOBAL:
        mu_a, mu_b = a.mean(), b.mean()
        var_a = ((a - mu_a) ** 2).mean()
        var_b = ((b - mu_b) ** 2).mean()
        cov = ((a - mu_a) * (b - mu_b)).mean()
    else:
        taps = params.taps(min(a.shape))
        mu_a, mu_b = _valid_filter(a, taps), _valid_filter(b, taps)
        var_a = _valid_filter(a * a, taps) - mu_a * mu_a
        var_b = _valid_filter(b * b, taps) - mu_b * mu_b
        cov = _valid_filter(a * b, taps) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return np.atleast_2d(num / den)


def ssim(x, y, params=DEFAULT_SSIM):
    """Mean SSIM over all window positions that fit inside the image."""
    return float(ssim_map(x, y, params).mean())


def psnr(x, y):
    """PSNR in dB on luma with peak 1; ``inf`` for identical images."""
    _check_pair(x, y)
    mse = float(np.mean((to_luma(x).data - to_luma(y).data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def s_t(recon, lr, params=DEFAULT_SSIM):
    """SSIM between a decoded clean estimate and the bicubically upscaled LR."""
    up = lr if (lr.width, lr.height) == (recon.width, recon.height) else resize(lr, recon.width, recon.height, BICUBIC)
    return ssim(recon, up, params)


@dataclass
class Trajectory:
    """S_t values in inference order (timesteps strictly decreasing)."""

    entries: list = field(default_factory=list)

    def append(self, t, s):
        if self.entries and t >= self.entries[-1][0]:
            raise ValueError(f"timestep {t} does not decrease from {self.entries[-1][0]}")
        if not math.isfinite(s):
            raise ValueError(f"non-finite SSIM at t={t}")
        self.entries.append((int(t), float(s)))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def timesteps(self):
        return [t for t, _ in self.entries]

    @property
    def values(self):
        return [s for _, s in self.entries]

    def argmax(self):
        """(t, s) of the maximum; the latest timestep wins ties."""
        best = None
        for t, s in self.entries:
            if best is None or s >= best[1]:
                best = (t, s)
        return best

    def to_csv(self):
        out = io.StringIO()
        out.write("t,ssim\n")
        for t, s in self.entries:
            out.write(f"{t},{s!r}\n")
        return out.getvalue()

    def write(self, path):
        Path(path).write_text(self.to_csv())
        return Path(path)

    @classmethod
    def read(cls, path):
        traj = cls()
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                traj.append(int(row["t"]), float(row["ssim"]))
        return traj
