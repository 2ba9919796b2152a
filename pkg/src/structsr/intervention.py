"""Structure-aware screening and the two embeddings wrapped around a DDIM loop.

During the first ``T_SAS`` steps the sampler runs unmodified while every
clean estimate is decoded and scored against the upscaled LR input; the best
one becomes the structural embedding ``z_se`` and its score ``s_max``. For the
remaining steps the noise prediction is blended with one conditioned on
``z_se`` (SCE) and ``z_se`` is mixed back into the clean estimate with a
weight that decays linearly to zero (IDE).
"""

from dataclasses import dataclass, field
import hashlib
import math
import time
from typing import Optional

import numpy as np

from .diffusion import predict_x0, step_prev
from .imagecore import BICUBIC, resize
from .metrics import DEFAULT_SSIM, SsimParams, Trajectory, s_t


class ContractError(RuntimeError):
    pass


@dataclass(frozen=True)
class StructSrParams:
    t_sas_fraction: float = 0.3
    enable_sce: bool = True
    enable_ide: bool = True
    ssim_params: SsimParams = DEFAULT_SSIM
    # Upper clamp on s_max; 0 turns the intervention into a no-op.
    s_max_cap: float = 1.0

    def __post_init__(self):
        if not 0 <= self.t_sas_fraction < 1:
            raise ValueError(f"t_sas_fraction must be in [0, 1), got {self.t_sas_fraction}")
        if not 0 <= self.s_max_cap <= 1:
            raise ValueError(f"s_max_cap must be in [0, 1], got {self.s_max_cap}")

    def t_sas(self, T):
        n = int(math.floor(self.t_sas_fraction * T + 0.5))
        if not 1 <= n < T:
            raise ValueError(f"T_SAS = {n} must lie in [1, {T - 1}] (fraction {self.t_sas_fraction}, T {T})")
        return n


@dataclass
class SasState:
    T: int
    t_sas: int
    buffer: list = field(default_factory=list)
    s_max: float = -math.inf
    z_se: Optional[np.ndarray] = None
    capture_t: Optional[int] = None

    def in_window(self, t):
        return self.T - self.t_sas < t <= self.T

    def observe(self, t, score, z0t):
        """Record one screened score; ties go to the later step."""
        if not self.in_window(t):
            raise ContractError(f"SAS step at t={t} outside window ({self.T - self.t_sas}, {self.T}]")
        if len(self.buffer) >= self.t_sas:
            raise ContractError("SAS buffer already holds T_SAS entries")
        self.buffer.append((t, score))
        if score >= self.s_max:
            self.s_max = score
            self.z_se = np.array(z0t, dtype=np.float64, copy=True)
            self.capture_t = t
        return self


def sas_update(state, z0t, t, lr, codec, ssim_params=DEFAULT_SSIM):
    score = s_t(codec.decode(z0t), lr, ssim_params)
    return state.observe(t, score, z0t)


def clamp_weight(s_max, cap=1.0):
    return min(max(s_max, 0.0), cap)


def sce_blend(eps_e, eps_o, s_max):
    """Noise prediction mixed between the embedding- and LR-conditioned passes."""
    if eps_e.shape != eps_o.shape:
        raise ValueError(f"shape mismatch {eps_e.shape} vs {eps_o.shape}")
    s = clamp_weight(s_max)
    return s * eps_e + (1.0 - s) * eps_o


def ide_weight(t, T, t_sas, s_max):
    if not T > t_sas:
        raise ValueError(f"need T > t_sas, got T={T}, t_sas={t_sas}")
    if not 0 <= t <= T - t_sas:
        raise ContractError(f"IDE weight requested at t={t} outside [0, {T - t_sas}]")
    return clamp_weight(s_max) * t / (T - t_sas)


def ide_insert(z0t, z_se, w):
    if z0t.shape != z_se.shape:
        raise ValueError(f"shape mismatch {z0t.shape} vs {z_se.shape}")
    if not 0 <= w <= 1:
        raise ValueError(f"IDE weight {w} outside [0, 1]")
    return w * z_se + (1.0 - w) * z0t


@dataclass
class RunReport:
    T: int
    t_sas: int = 0
    s_max: float = math.nan
    capture_t: Optional[int] = None
    sas_decodes: int = 0
    wall_ms: float = 0.0
    stage_ms: dict = field(default_factory=dict)
    z_t_hash: str = ""


def latent_hash(z):
    return hashlib.sha256(np.ascontiguousarray(z).tobytes()).hexdigest()[:16]


class _Clock:
    def __init__(self):
        self.totals = {}

    def add(self, stage, start):
        self.totals[stage] = self.totals.get(stage, 0.0) + (time.perf_counter() - start) * 1e3


def _check_finite(z, t, what):
    if not np.all(np.isfinite(z)):
        raise FloatingPointError(f"non-finite values in {what} at t={t}")


def run_inference(lr, denoiser, codec, sched, params=None, seed=0, size=None, diagnostics=False):
    """Super-resolve ``lr``; ``params=None`` runs the plain sampler.

    ``size`` is the ``(width, height)`` of the output; the LR image is
    bicubically upscaled to it for conditioning and for scoring. The initial
    latent depends only on ``seed`` and the output shape, so a baseline and a
    StructSR run with the same seed start from the same ``Z_T``.

    Returns ``(image, trajectory, report)``.
    """
    started = time.perf_counter()
    clock = _Clock()
    width, height = size or (lr.width, lr.height)
    lr_up = resize(lr, width, height, BICUBIC)
    cond = codec.encode(lr_up)
    ssim_params = params.ssim_params if params else DEFAULT_SSIM

    T = sched.T
    z = np.random.default_rng(seed).standard_normal(cond.shape)
    report = RunReport(T=T, z_t_hash=latent_hash(z))
    traj = Trajectory()
    state = None
    if params is not None:
        report.t_sas = params.t_sas(T)
        state = SasState(T, report.t_sas)

    for t in range(T, 0, -1):
        t0 = time.perf_counter()
        eps_o = denoiser.predict(z, cond, t)
        clock.add("denoise", t0)

        if state is None or state.in_window(t):
            z0t = predict_x0(z, eps_o, t, sched)
            _check_finite(z0t, t, "clean estimate")
            t0 = time.perf_counter()
            if state is not None:
                sas_update(state, z0t, t, lr_up, codec, ssim_params)
                report.sas_decodes += 1
                traj.append(t, state.buffer[-1][1])
            elif diagnostics:
                traj.append(t, s_t(codec.decode(z0t), lr_up, ssim_params))
            clock.add("screen", t0)
            z = step_prev(z0t, eps_o, t, sched)
        else:
            s_max = clamp_weight(state.s_max, params.s_max_cap)
            t0 = time.perf_counter()
            if params.enable_sce:
                eps_e = denoiser.predict(z, state.z_se, t)
                eps = sce_blend(eps_e, eps_o, s_max)
            else:
                eps = eps_o
            clock.add("sce", t0)
            z0t = predict_x0(z, eps, t, sched)
            if params.enable_ide:
                z0t = ide_insert(z0t, state.z_se, ide_weight(t, T, report.t_sas, s_max))
            _check_finite(z0t, t, "clean estimate")
            if diagnostics:
                t0 = time.perf_counter()
                traj.append(t, s_t(codec.decode(z0t), lr_up, ssim_params))
                clock.add("diagnostics", t0)
            z = step_prev(z0t, eps, t, sched)
        _check_finite(z, t, "latent")

    if state is not None:
        report.s_max = state.s_max
        report.capture_t = state.capture_t
    out = codec.decode(z)
    report.stage_ms = clock.totals
    report.wall_ms = (time.perf_counter() - started) * 1e3
    return out, traj, report
