"""Corpus runs: baseline vs StructSR modes, T_SAS sweeps, trajectory bundles."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import csv
import io
import logging
import math
from pathlib import Path

import numpy as np

from ..degrade import DegradationSpec, degrade
from ..diffusion import IdentityCodec
from ..fileio import IMAGE_SUFFIXES, read_image, write_image
from ..imagecore import BICUBIC, ImageError, center_crop, resize
from ..intervention import run_inference
from ..metrics import psnr, ssim

log = logging.getLogger(__name__)

REPORT_HEADER = ["image", "mode", "psnr_db", "ssim", "s_max", "capture_t", "runtime_ms"]
SUMMARY_HEADER = ["mode", "n", "mean_psnr_db", "mean_ssim", "psnr_gain_pct", "ssim_gain_pct"]


class IngestError(RuntimeError):
    pass


def ingest(directory, crop=None):
    """Read every PNG/PPM/PGM in ``directory`` in filename order.

    Unreadable or too-small files are skipped with a warning. Returns
    ``(images, skipped)`` where ``images`` is a list of ``(id, ImageBuf)`` and
    ``skipped`` a list of ``(filename, reason)``.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise IngestError(f"input directory {directory} does not exist")
    images, skipped = [], []
    for path in sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES):
        try:
            img = read_image(path)
            if crop:
                img = center_crop(img, crop)
        except (ImageError, ValueError, OSError) as exc:
            log.warning("skipping %s: %s", path.name, exc)
            skipped.append((path.name, str(exc)))
            continue
        images.append((path.stem, img))
    if skipped:
        log.warning("%d file(s) skipped in %s", len(skipped), directory)
    if not images:
        raise IngestError(f"no readable images in {directory}")
    return images, skipped


@dataclass
class RunResult:
    image: str
    mode: str
    psnr_db: float
    ssim: float
    s_max: float
    capture_t: object
    runtime_ms: float
    output: object = None
    trajectory: object = None
    z_t_hash: str = ""


@dataclass
class ExperimentReport:
    config: object
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def row(self, image, mode):
        for r in self.rows:
            if r.image == image and r.mode == mode:
                return r
        raise KeyError((image, mode))

    def aggregates(self):
        """Per-mode means, with relative gains over the baseline mode in percent."""
        out = []
        by_mode = {m: [r for r in self.rows if r.mode == m] for m in self.config.modes}
        means = {}
        for mode, rows in by_mode.items():
            if rows:
                means[mode] = (float(np.mean([r.psnr_db for r in rows])),
                               float(np.mean([r.ssim for r in rows])))
        base = means.get("baseline")
        for mode in self.config.modes:
            if mode not in means:
                continue
            p, s = means[mode]
            gain_p = gain_s = math.nan
            if base is not None:
                gain_p = 100.0 * (p - base[0]) / abs(base[0]) if base[0] else math.nan
                gain_s = 100.0 * (s - base[1]) / abs(base[1]) if base[1] else math.nan
            out.append((mode, len(by_mode[mode]), p, s, gain_p, gain_s))
        return out

    @property
    def exit_code(self):
        return 2 if self.failures else 0

    def report_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in self.rows:
            w.writerow([r.image, r.mode, _fmt(r.psnr_db), _fmt(r.ssim), _fmt(r.s_max),
                        "" if r.capture_t is None else r.capture_t,
                        _fmt(r.runtime_ms, 3) if self.config.timing else ""])
        return buf.getvalue()

    def summary_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for mode, n, p, s, gp, gs in self.aggregates():
            w.writerow([mode, n, _fmt(p), _fmt(s), _fmt(gp, 4), _fmt(gs, 4)])
        return buf.getvalue()


def _fmt(x, digits=8):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{digits}f}"


def process_image(image_id, hr, config):
    """Degrade one HR image and run every configured mode on it."""
    sched = config.schedule()
    codec = IdentityCodec()
    lr = degrade(hr, config.degradation(), config.seed)
    cond = codec.encode(resize(lr, hr.width, hr.height, BICUBIC))
    denoiser = config.make_denoiser(sched, cond)
    results = []
    for mode in config.modes:
        out, traj, rep = run_inference(lr, denoiser, codec, sched, config.structsr_params(mode),
                                       seed=config.seed, size=(hr.width, hr.height),
                                       diagnostics=config.diagnostics)
        results.append(RunResult(image_id, mode, psnr(out, hr), ssim(out, hr, config.ssim_params()),
                                 rep.s_max, rep.capture_t, rep.wall_ms, out, traj, rep.z_t_hash))
    hashes = {r.z_t_hash for r in results}
    if len(hashes) != 1:
        raise RuntimeError(f"{image_id}: modes started from different initial latents")
    return lr, results


def _process_safe(args):
    image_id, hr, config = args
    try:
        return image_id, process_image(image_id, hr, config), None
    except Exception as exc:  # per-image failures are recorded, not fatal
        return image_id, None, f"{type(exc).__name__}: {exc}"


def run_corpus(images, config):
    """Run all modes over already-loaded ``(id, ImageBuf)`` pairs (no file output)."""
    tasks = [(iid, img, config) for iid, img in images]
    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(config.jobs, len(tasks))) as pool:
            done = list(pool.map(_process_safe, tasks))
    else:
        done = [_process_safe(t) for t in tasks]
    report = ExperimentReport(config)
    lrs = {}
    for image_id, result, error in done:
        if error is not None:
            log.error("%s failed: %s", image_id, error)
            report.failures.append((image_id, error))
            continue
        lr, rows = result
        lrs[image_id] = lr
        report.rows.extend(rows)
    return report, lrs


def write_outputs(report, lrs, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for image_id, lr in lrs.items():
        write_image(lr, out_dir / f"{image_id}_lr.png")
    for r in report.rows:
        write_image(r.output, out_dir / f"{r.image}_{r.mode}.png")
        r.trajectory.write(out_dir / f"traj_{r.image}_{r.mode}.csv")
    (out_dir / "report.csv").write_text(report.report_csv())
    (out_dir / "summary.csv").write_text(report.summary_csv())
    if report.failures:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["image", "error"])
        w.writerows(report.failures)
        (out_dir / "failures.csv").write_text(buf.getvalue())
    if report.config.figures:
        from . import figures

        figures.plot_summary(report, out_dir / "summary.png")
        if report.config.diagnostics:
            for image_id in lrs:
                runs = [(r.mode, r.trajectory) for r in report.rows if r.image == image_id]
                figures.plot_trajectories(runs, out_dir / f"traj_{image_id}.png",
                                          title=f"{image_id}: S_t during sampling")


def run_experiment(config, images=None):
    """Full experiment: ingest (unless ``images`` given), run, write outputs."""
    skipped = []
    if images is None:
        if config.input_dir is None:
            raise IngestError("no input directory configured")
        images, skipped = ingest(config.input_dir, config.crop)
    report, lrs = run_corpus(images, config)
    report.skipped = skipped
    write_outputs(report, lrs, config.output_dir)
    return report


def _frac_label(f):
    return f"{f:g}"


def sweep_tsas(config, fractions, images=None):
    """One experiment per screening fraction plus a combined ``sweep.csv``."""
    bad = [f for f in fractions if not 0.05 <= f <= 0.9]
    if bad:
        raise ValueError(f"T_SAS fractions outside [0.05, 0.9]: {bad}")
    if images is None:
        if config.input_dir is None:
            raise IngestError("no input directory configured")
        images, _ = ingest(config.input_dir, config.crop)
    root = Path(config.output_dir)
    reports = []
    for f in fractions:
        sub = replace(config, tsas_fraction=f, output_dir=str(root / f"tsas_{_frac_label(f)}"))
        reports.append(run_experiment(sub, images))
    write_sweep_csv(fractions, reports, root / "sweep.csv")
    if config.figures:
        from . import figures

        figures.plot_sweep(fractions, reports, root / "sweep.png")
    return reports


def sweep_rows(fractions, reports):
    rows = []
    for f, rep in zip(fractions, reports):
        for mode, n, p, s, _, _ in rep.aggregates():
            if mode == "baseline":
                continue
            rows.append((f, rep.config.timesteps, rep.config.structsr_params(mode).t_sas(rep.config.timesteps), mode, p, s))
    return rows


def write_sweep_csv(fractions, reports, path):
    """``fraction,t_sas,mode,mean_psnr_db,mean_ssim`` rows plus a best-fraction footer."""
    rows = sweep_rows(fractions, reports)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fraction", "t_sas", "mode", "mean_psnr_db", "mean_ssim"])
    for f, _, t_sas, mode, p, s in rows:
        w.writerow([_frac_label(f), t_sas, mode, _fmt(p), _fmt(s)])
    scored = [(s, f) for f, _, _, mode, _, s in rows if mode == "structsr"]
    if scored:
        best = max(scored, key=lambda x: x[0])[1]
        buf.write(f"# best_fraction_ssim={_frac_label(best)}\n")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(buf.getvalue())
    return Path(path)


@dataclass
class TraceRun:
    run_id: str
    trajectory: object
    degradation: DegradationSpec


def emit_trajectory_bundle(runs, out):
    """One ``t,ssim`` CSV per run plus ``index.csv`` linking runs to degradations."""
    if not runs:
        raise ValueError("no trajectories to write")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run_id", "label", "scale_factor", "blur_sigma", "jpeg_quality", "file"])
    for run in runs:
        name = f"traj_{run.run_id}.csv"
        run.trajectory.write(out / name)
        d = run.degradation
        w.writerow([run.run_id, d.label, d.scale_factor, d.blur_sigma,
                    "" if d.jpeg_quality is None else d.jpeg_quality, name])
    (out / "index.csv").write_text(buf.getvalue())
    return out


def degradation_ladder(spec):
    """D, D + B, D + B + J variants of ``spec`` (stages it disables are dropped)."""
    ladder = [DegradationSpec(spec.scale_factor)]
    if spec.blur_sigma > 0:
        ladder.append(DegradationSpec(spec.scale_factor, spec.blur_sigma))
    if spec.jpeg_quality is not None:
        ladder.append(DegradationSpec(spec.scale_factor, spec.blur_sigma, spec.jpeg_quality))
    return ladder


def trace(config, images=None):
    """Baseline S_t trajectories for each image under increasing degradation."""
    if images is None:
        if config.input_dir is None:
            raise IngestError("no input directory configured")
        images, _ = ingest(config.input_dir, config.crop)
    sched = config.schedule()
    codec = IdentityCodec()
    runs = []
    for image_id, hr in images:
        for spec in degradation_ladder(config.degradation()):
            lr = degrade(hr, spec, config.seed)
            cond = codec.encode(resize(lr, hr.width, hr.height, BICUBIC))
            den = config.make_denoiser(sched, cond)
            _, traj, _ = run_inference(lr, den, codec, sched, None, seed=config.seed,
                                       size=(hr.width, hr.height), diagnostics=True)
            tag = spec.label.replace(" + ", "").lower()
            runs.append(TraceRun(f"{image_id}_{tag}", traj, spec))
    out = emit_trajectory_bundle(runs, config.output_dir)
    if config.figures:
        from . import figures

        figures.plot_trajectories([(r.run_id, r.trajectory) for r in runs], out / "trajectories.png",
                                  title="S_t vs. degraded LR during baseline sampling")
    return runs
