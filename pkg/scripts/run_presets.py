#!/usr/bin/env python3
"""Run figure-reproduction presets and write one CSV per figure.

Examples:
    python scripts/run_presets.py --outdir results
    python scripts/run_presets.py --scale paper --presets fig_rate_vs_snr
"""

import argparse
import pathlib
import time

from hbsim.montecarlo import PRESET_NAMES, figure_preset, run_sweep, write_csv


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scale", choices=("desk", "paper"), default="desk")
    parser.add_argument("--outdir", default="results")
    parser.add_argument("--presets", nargs="*", default=list(PRESET_NAMES),
                        choices=PRESET_NAMES)
    parser.add_argument("--trials", type=int, default=None,
                        help="override the preset trial count")
    parser.add_argument("--threads", type=int, default=None)
    args = parser.parse_args()

    outdir = pathlib.Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in args.presets:
        cfg = figure_preset(name, args.scale)
        if args.trials is not None:
            cfg.n_trials = args.trials
        start = time.perf_counter()
        result = run_sweep(cfg, n_workers=args.threads)
        out = outdir / f"{name}_{args.scale}.csv"
        write_csv(result, out)
        print(f"{name}: {time.perf_counter() - start:.1f}s -> {out}")


if __name__ == "__main__":
    main()
