"""Matplotlib renderings of the CSV outputs (trajectories, mode summary, sweep)."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _figure(width=5.0):
    golden = (math.sqrt(5) - 1.0) / 2.0
    return plt.subplots(figsize=(width, width * golden))


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_trajectories(runs, path, title=None):
    """S_t against timestep for ``(label, Trajectory)`` pairs; the peak of each is marked."""
    with plt.rc_context(RC):
        fig, ax = _figure()
        for label, traj in runs:
            if not len(traj):
                continue
            line, = ax.plot(traj.timesteps, traj.values, lw=1.2, label=label)
            t_best, s_best = traj.argmax()
            ax.plot([t_best], [s_best], "o", ms=4, color=line.get_color())
        ax.invert_xaxis()
        ax.set_xlabel("timestep t")
        ax.set_ylabel("SSIM vs. upscaled LR")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        return _save(fig, path)


def plot_summary(report, path):
    """Mean PSNR and SSIM per mode, side by side."""
    agg = report.aggregates()
    with plt.rc_context(RC):
        fig, (ax_p, ax_s) = plt.subplots(1, 2, figsize=(6.0, 2.6))
        modes = [a[0] for a in agg]
        ax_p.bar(modes, [a[2] for a in agg], color="0.55")
        ax_s.bar(modes, [a[3] for a in agg], color="0.35")
        ax_p.set_ylabel("mean PSNR (dB)")
        ax_s.set_ylabel("mean SSIM")
        for ax in (ax_p, ax_s):
            ax.tick_params(axis="x", labelrotation=30)
        return _save(fig, path)


def plot_sweep(fractions, reports, path):
    with plt.rc_context(RC):
        fig, ax_p = _figure()
        psnr, ssim = [], []
        for rep in reports:
            row = next(a for a in rep.aggregates() if a[0] == "structsr") if "structsr" in rep.config.modes else None
            psnr.append(row[2] if row else math.nan)
            ssim.append(row[3] if row else math.nan)
        ax_p.plot(fractions, psnr, "o-", color="C0")
        ax_p.set_xlabel("screening fraction T_SAS / T")
        ax_p.set_ylabel("mean PSNR (dB)", color="C0")
        ax_s = ax_p.twinx()
        ax_s.plot(fractions, ssim, "s--", color="C1")
        ax_s.set_ylabel("mean SSIM", color="C1")
        return _save(fig, path)
