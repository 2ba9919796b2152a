"""Structure-aware intervention for diffusion super-resolution, with a desk-scale test bed."""

from .degrade import DegradationSpec, degrade, jpeg_roundtrip
from .diffusion import (HallucinationSpec, IdentityCodec, NoiseSchedule, make_schedule,
                        oracle_denoiser, predict_x0, restoration_denoiser, step_prev)
from .imagecore import BICUBIC, NEAREST, ImageBuf, ResampleKernel, gaussian_blur, resize, to_luma
from .intervention import (RunReport, SasState, StructSrParams, ide_insert, ide_weight,
                           run_inference, sas_update, sce_blend)
from .metrics import SsimParams, Trajectory, psnr, s_t, ssim

__version__ = "0.1.0"
