#!/usr/bin/env python3
"""Sweep the noise factor 0.0-0.9 with white Gaussian corruption.

Trains one denoiser per noise factor on a synthetic spectrogram dataset and
writes results.csv, the loss-vs-NF curve, and report.md under --out. Desk
defaults (32 images at 64x64, 30 epochs per cell) run in a few minutes on a
single core; --workers parallelizes across cells without changing a byte of
the results.
"""

import argparse
import sys

sys.path.insert(0, "src")  # allow running from a fresh checkout

from specdenoise.cdae import TrainConfig
from specdenoise.dataset import build_synthetic
from specdenoise.noisegen import DistKind, Distribution
from specdenoise.sweep import SweepGrid, TENTHS, best_nf, emit_report, run_grid


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/white_noise_sweep")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=32, help="dataset size")
    ap.add_argument("--size", type=int, default=64, help="square image side")
    ap.add_argument("--epochs", type=int, default=30)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args(argv)

    entries = build_synthetic(args.count, (args.size, args.size, 1), seed=args.seed)
    grid = SweepGrid(
        dataset=tuple(e.pixels for e in entries),
        distributions=(Distribution(DistKind.GAUSSIAN),),
        nf_values=TENTHS,
        a_values=(0.0,),
        epochs_values=(args.epochs,),
        master_seed=args.seed,
        train_template=TrainConfig(epochs=args.epochs),
    )
    records = run_grid(grid, args.out, workers=args.workers, resume=args.resume)
    emit_report(records, args.out)

    summary = best_nf(records, Distribution(DistKind.GAUSSIAN), a=0.0)
    print(f"best noise factor(s): {summary.nf_values} "
          f"at min val loss {summary.min_loss:.5f}")
    if summary.runner_up_nf is not None:
        print(f"runner-up: NF {summary.runner_up_nf} "
              f"at {summary.runner_up_loss:.5f}")
    print(f"full report under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
