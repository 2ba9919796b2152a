"""Flat run configuration, loadable from TOML and overridable key by key."""

from dataclasses import dataclass, field, fields, replace
import os
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from ..degrade import DegradationSpec
from ..diffusion import HallucinationSpec, make_schedule, oracle_denoiser, restoration_denoiser
from ..intervention import StructSrParams
from ..metrics import SsimParams

MODES = ("baseline", "structsr", "wo_sce", "wo_ide")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    input_dir: Optional[str] = None
    output_dir: str = "out"
    timesteps: int = 200
    beta_start: float = 1e-4
    beta_end: float = 0.02
    tsas_fraction: float = 0.3
    seed: int = 0
    modes: tuple = ("baseline", "structsr")
    diagnostics: bool = False
    crop: Optional[int] = None
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    timing: bool = True
    figures: bool = True
    s_max_cap: float = 1.0

    # degradation: blur -> downsample -> JPEG
    scale_factor: int = 2
    blur_sigma: float = 0.8
    jpeg_quality: Optional[int] = 80

    # metric window
    ssim_window: str = "gaussian"
    ssim_size: int = 11

    # toy denoiser
    denoiser: str = "restoration"
    detail_gain: float = 0.3
    detail_sigma: float = 1.0
    fade: float = 0.3
    fade_power: float = 8.0
    a_max: float = 0.15
    exponent: float = 2.0
    band_low: float = 0.5
    band_high: float = 2.0
    hallucination_seed: int = 7
    persistence: float = 0.4

    def __post_init__(self):
        if self.timesteps < 2:
            raise ConfigError(f"timesteps must be >= 2, got {self.timesteps}")
        if not self.modes:
            raise ConfigError("modes must not be empty")
        bad = [m for m in self.modes if m not in MODES]
        if bad:
            raise ConfigError(f"unknown modes {bad}; choose from {MODES}")
        if self.denoiser not in ("restoration", "oracle"):
            raise ConfigError(f"unknown denoiser {self.denoiser!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            self.degradation()
            self.ssim_params()
            self.structsr_params("structsr").t_sas(self.timesteps)
            self.hallucination()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def degradation(self):
        return DegradationSpec(self.scale_factor, self.blur_sigma, self.jpeg_quality)

    def ssim_params(self):
        return SsimParams(window=self.ssim_window, size=self.ssim_size)

    def schedule(self):
        return make_schedule(self.timesteps, self.beta_start, self.beta_end)

    def hallucination(self):
        return HallucinationSpec(self.a_max, self.exponent, self.band_low, self.band_high,
                                 self.hallucination_seed, self.persistence)

    def make_denoiser(self, sched, cond):
        """Denoiser for one image; the oracle targets the upscaled LR latent."""
        if self.denoiser == "oracle":
            return oracle_denoiser(cond, sched)
        return restoration_denoiser(sched, self.detail_gain, self.hallucination(),
                                    detail_sigma=self.detail_sigma, fade=self.fade,
                                    fade_power=self.fade_power)

    def structsr_params(self, mode):
        if mode == "baseline":
            return None
        return StructSrParams(self.tsas_fraction, enable_sce=mode != "wo_sce",
                              enable_ide=mode != "wo_ide", ssim_params=self.ssim_params(),
                              s_max_cap=self.s_max_cap)

    def with_overrides(self, **values):
        return replace(self, **coerce_values(values))


_FIELDS = {f.name: f for f in fields(RunConfig)}
_NULLS = ("none", "null", "")


def _coerce(name, value):
    default = _FIELDS[name].default
    if name == "modes":
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        return tuple(value)
    if isinstance(value, str) and value.strip().lower() in _NULLS and name in ("crop", "jpeg_quality", "input_dir"):
        return None
    if name in ("crop", "jpeg_quality", "jobs"):
        return int(value)
    if isinstance(default, bool):
        if isinstance(value, str):
            low = value.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ConfigError(f"{name}: not a boolean: {value!r}")
            return low in ("1", "true", "yes", "on")
        return bool(value)
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value) if value is not None else None


def coerce_values(values):
    out = {}
    for key, value in values.items():
        name = key.replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            out[name] = _coerce(name, value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: {exc}") from exc
    return out


def _flatten(table):
    flat = {}
    for key, value in table.items():
        if isinstance(value, dict):
            flat.update(_flatten(value))
        else:
            flat[key] = value
    return flat


def load_config(path=None, **overrides):
    """RunConfig from an optional TOML file; ``overrides`` win over file values.

    Sections are allowed for readability but keys share one namespace.
    """
    values = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                values = _flatten(tomllib.load(fh))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values.update(overrides)
    try:
        return RunConfig(**coerce_values(values))
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(config, path):
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        if value is None:
            text = '"none"'
        elif isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, (int, float)):
            text = repr(value)
        elif isinstance(value, tuple):
            text = "[" + ", ".join(f'"{v}"' for v in value) + "]"
        else:
            text = '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'
        lines.append(f"{f.name} = {text}")
    Path(path).write_text("\n".join(lines) + "\n")
