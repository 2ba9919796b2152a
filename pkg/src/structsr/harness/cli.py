"""Command line: ``structsr {run,sweep,trace,degrade,metrics,corpus}``.

Every config key can be overridden with ``--key=value`` (dashes or
underscores); explicit flags win over the ``--config`` file.
"""

import argparse
import logging
from pathlib import Path
import sys

from ..degrade import degrade
from ..fileio import read_image, write_image
from ..imagecore import ImageError
from ..metrics import psnr, ssim
from .config import ConfigError, load_config
from .experiment import IngestError, run_experiment, sweep_tsas, trace

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2

# named flag -> config key
FLAG_KEYS = {
    "input": "input_dir",
    "output": "output_dir",
    "timesteps": "timesteps",
    "tsas_fraction": "tsas_fraction",
    "modes": "modes",
    "seed": "seed",
    "jobs": "jobs",
}


def _add_run_flags(p):
    p.add_argument("--config", type=Path, help="TOML config file")
    p.add_argument("--input", help="directory of HR images")
    p.add_argument("--output", help="output directory")
    p.add_argument("--timesteps", type=int)
    p.add_argument("--tsas-fraction", type=float)
    p.add_argument("--modes", help="comma list of baseline,structsr,wo_sce,wo_ide")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--diagnostics", action="store_true", default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="structsr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("run", help="baseline vs StructSR over a corpus"))
    p = sub.add_parser("sweep", help="sweep the screening fraction T_SAS / T")
    _add_run_flags(p)
    p.add_argument("--fractions", default="0.1,0.2,0.3,0.4,0.5")
    _add_run_flags(sub.add_parser("trace", help="S_t trajectories under D, D+B, D+B+J"))

    p = sub.add_parser("degrade", help="synthesize an LR image from an HR file")
    p.add_argument("src", type=Path)
    p.add_argument("dst", type=Path)
    p.add_argument("--config", type=Path)

    p = sub.add_parser("metrics", help="PSNR / SSIM (luma) between two image files")
    p.add_argument("a", type=Path)
    p.add_argument("b", type=Path)
    p.add_argument("--config", type=Path)

    p = sub.add_parser("corpus", help="write a seeded synthetic HR corpus")
    p.add_argument("out", type=Path)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    return parser


def parse_overrides(extra):
    """``--key=value`` / ``--key value`` leftovers into a dict."""
    out = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key, eq, value = tok[2:].partition("=")
        if not eq:
            value = next(it, None)
            if value is None or value.startswith("--"):
                raise ConfigError(f"missing value for --{key}")
        out[key.replace("-", "_")] = value
    return out


def _config(args, extra):
    overrides = parse_overrides(extra)
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "diagnostics", None):
        overrides["diagnostics"] = True
    return load_config(getattr(args, "config", None), **overrides)


def _print_summary(report):
    sys.stdout.write(report.summary_csv())
    if report.failures:
        print(f"{len(report.failures)} image(s) failed; see failures.csv", file=sys.stderr)


def main(argv=None):
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "corpus":
            from .corpus import synthetic_corpus

            if extra:
                parser.error(f"unrecognized arguments: {' '.join(extra)}")
            args.out.mkdir(parents=True, exist_ok=True)
            for image_id, img in synthetic_corpus(args.n, args.size, args.seed):
                write_image(img, args.out / f"{image_id}.png")
            return EXIT_OK

        config = _config(args, extra)
        if args.command == "run":
            report = run_experiment(config)
            _print_summary(report)
            return report.exit_code
        if args.command == "sweep":
            fractions = [float(f) for f in args.fractions.split(",") if f.strip()]
            reports = sweep_tsas(config, fractions)
            sys.stdout.write(Path(config.output_dir, "sweep.csv").read_text())
            return EXIT_PARTIAL if any(r.failures for r in reports) else EXIT_OK
        if args.command == "trace":
            runs = trace(config)
            print(f"wrote {len(runs)} trajectories to {config.output_dir}")
            return EXIT_OK
        if args.command == "degrade":
            write_image(degrade(read_image(args.src), config.degradation(), config.seed), args.dst)
            return EXIT_OK
        if args.command == "metrics":
            a, b = read_image(args.a), read_image(args.b)
            print("psnr_db,ssim")
            print(f"{psnr(a, b):.6f},{ssim(a, b, config.ssim_params()):.6f}")
            return EXIT_OK
    except (ConfigError, IngestError, ImageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
