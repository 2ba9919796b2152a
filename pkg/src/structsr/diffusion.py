"""Noise schedule, deterministic DDIM steps, identity codec and analytic toy denoisers.

Latents are plain ``(C, H, W)`` float64 arrays. Timesteps run ``T .. 1``;
``alpha_bar(0)`` is defined as 1 so that the last step returns the clean
estimate unchanged.
"""

from dataclasses import dataclass
import math

import numpy as np

from .imagecore import ImageBuf, blur_array


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    betas: np.ndarray        # index t = 1..T, betas[0] unused (0)
    alpha_bars: np.ndarray   # index t = 0..T, alpha_bars[0] == 1

    @property
    def T(self):
        return len(self.betas) - 1

    @property
    def alphas(self):
        return 1.0 - self.betas

    def alpha_bar(self, t):
        return float(self.alpha_bars[t])

    def sigma(self, t):
        """Noise-to-signal ratio sqrt((1 - abar) / abar) at step ``t``."""
        ab = self.alpha_bars[t]
        return math.sqrt((1.0 - ab) / ab)

    def check_t(self, t):
        if not 1 <= t <= self.T:
            raise ScheduleError(f"timestep {t} outside [1, {self.T}]")


def make_schedule(T, beta_start=1e-4, beta_end=0.02):
    """Linear beta schedule over t = 1..T."""
    if T < 2:
        raise ScheduleError(f"T must be >= 2, got {T}")
    if not 0 < beta_start < beta_end < 1:
        raise ScheduleError(f"need 0 < beta_start < beta_end < 1, got {beta_start}, {beta_end}")
    betas = np.linspace(beta_start, beta_end, T)
    abar = np.cumprod(1.0 - betas.astype(np.longdouble)).astype(np.float64)
    if not (np.all(np.diff(abar) < 0) and np.all(abar > 0)):
        raise ScheduleError("alpha_bar must be positive and strictly decreasing")
    return NoiseSchedule(np.concatenate([[0.0], betas]), np.concatenate([[1.0], abar]))


def _same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"latent shape mismatch: {a.shape} vs {b.shape}")


def predict_x0(z_t, eps, t, sched):
    """Clean-latent estimate Z_{0|t} from a noisy latent and a noise prediction."""
    _same_shape(z_t, eps)
    sched.check_t(t)
    ab = sched.alpha_bars[t]
    return (z_t - math.sqrt(1.0 - ab) * eps) / math.sqrt(ab)


def step_prev(x0, eps, t, sched):
    """Deterministic (eta = 0) DDIM move from step t to t - 1."""
    _same_shape(x0, eps)
    sched.check_t(t)
    ab = sched.alpha_bars[t - 1]
    if t == 1:
        return np.array(x0, dtype=np.float64, copy=True)
    return math.sqrt(ab) * x0 + math.sqrt(1.0 - ab) * eps


def noise_from_clean(z, clean, t, sched):
    """The noise prediction whose clean estimate is exactly ``clean``."""
    ab = sched.alpha_bars[t]
    return (z - math.sqrt(ab) * clean) / math.sqrt(1.0 - ab)


class IdentityCodec:
    """Latent space == pixel space."""

    def encode(self, img):
        return np.array(img.data, dtype=np.float64, copy=True)

    def decode(self, z):
        return ImageBuf(z)


class Denoiser:
    """Noise predictor ``predict(z, cond, t) -> eps``; must be pure."""

    def predict(self, z, cond, t):
        raise NotImplementedError


class OracleDenoiser(Denoiser):
    """Always implies the same clean latent, whatever ``z`` and ``cond`` are."""

    def __init__(self, target, sched):
        self.target = np.array(target, dtype=np.float64, copy=True)
        self.sched = sched

    def predict(self, z, cond, t):
        self.sched.check_t(t)
        return noise_from_clean(z, self.target, t, self.sched)


def oracle_denoiser(target, sched):
    return OracleDenoiser(target, sched)


@dataclass(frozen=True)
class HallucinationSpec:
    """Spurious texture added by the restoration denoiser.

    Amplitude ramps as ``a_max * (1 - t / T) ** exponent``. The texture is a
    band-passed white-noise field (difference of Gaussians between
    ``band_low`` and ``band_high`` pixels), fixed by ``seed`` and scaled to
    unit RMS.

    ``persistence`` is the latent-trust scale s: at noise level sigma_t the
    denoiser keeps a fraction ``s**2 / (s**2 + sigma_t**2)`` of whatever
    texture amplitude it reads back from ``z`` instead of its own ramp, which
    is what makes spurious detail self-sustaining late in sampling. With
    ``persistence = 0`` the texture is a pure function of ``t``.
    """

    a_max: float = 0.0
    exponent: float = 1.0
    band_low: float = 0.5
    band_high: float = 2.0
    seed: int = 0
    persistence: float = 0.0

    def __post_init__(self):
        if self.a_max < 0 or self.exponent < 1 or self.persistence < 0:
            raise ValueError(f"invalid hallucination spec {self}")
        if not 0 < self.band_low < self.band_high:
            raise ValueError("need 0 < band_low < band_high")

    def amplitude(self, t, T):
        return self.a_max * (1.0 - t / T) ** self.exponent

    def field(self, height, width):
        rng = np.random.default_rng(self.seed)
        white = rng.standard_normal((1, height, width))
        band = blur_array(white, self.band_low) - blur_array(white, self.band_high)
        return band / np.sqrt(np.mean(band ** 2))


class RestorationDenoiser(Denoiser):
    """Stylized SR denoiser: unsharp-masked conditioning plus late spurious texture.

    The implied clean latent at step t is::

        f(cond)   = cond + gain * (cond - blur(cond, detail_sigma))
        m_t(cond) = mean + (1 - fade_t) * (f(cond) - mean)
        clean     = m_t(cond) + amp_t * field

    ``fade_t = fade * ((t - 1) / (T - 1)) ** fade_power`` washes early
    estimates out towards the per-channel mean, the way high-noise posterior
    means lose contrast; it vanishes at t = 1. ``amp_t`` follows
    :class:`HallucinationSpec`.
    """

    def __init__(self, sched, detail_gain=0.0, hallucination=None, detail_sigma=1.0,
                 fade=0.0, fade_power=8.0):
        if not 0 <= fade <= 1:
            raise ValueError(f"fade must be in [0, 1], got {fade}")
        if detail_gain < 0:
            raise ValueError(f"detail_gain must be >= 0, got {detail_gain}")
        self.sched = sched
        self.detail_gain = detail_gain
        self.detail_sigma = detail_sigma
        self.fade = fade
        self.fade_power = fade_power
        self.hallucination = hallucination or HallucinationSpec()
        self._fields = {}

    def _field(self, shape):
        key = shape[1:]
        if key not in self._fields:
            self._fields[key] = self.hallucination.field(*key)
        return self._fields[key]

    def enhance(self, cond, t):
        """m_t(cond): the texture-free part of the implied clean latent."""
        out = cond
        if self.detail_gain > 0:
            out = cond + self.detail_gain * (cond - blur_array(cond, self.detail_sigma))
        fade = self.fade * ((t - 1) / (self.sched.T - 1)) ** self.fade_power
        if fade > 0:
            mean = out.mean(axis=(1, 2), keepdims=True)
            out = mean + (1.0 - fade) * (out - mean)
        return out

    def clean_estimate(self, z, cond, t):
        self.sched.check_t(t)
        spec = self.hallucination
        base = self.enhance(cond, t)
        if spec.a_max == 0:
            return base
        field = self._field(z.shape)
        amp = spec.amplitude(t, self.sched.T)
        if spec.persistence > 0:
            sig2 = self.sched.sigma(t) ** 2
            keep = spec.persistence ** 2 / (spec.persistence ** 2 + sig2)
            y = z / math.sqrt(self.sched.alpha_bars[t])
            seen = np.sum((y - base) * field) / (np.sum(field * field) * z.shape[0])
            amp = (1.0 - keep) * amp + keep * seen
        return base + amp * field

    def predict(self, z, cond, t):
        return noise_from_clean(z, self.clean_estimate(z, cond, t), t, self.sched)


def restoration_denoiser(sched, detail_gain=0.0, hallucination=None, **kwargs):
    return RestorationDenoiser(sched, detail_gain, hallucination, **kwargs)
