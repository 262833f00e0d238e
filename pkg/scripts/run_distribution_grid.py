#!/usr/bin/env python3
"""Grid over noise distribution x noise factor x coloring.

One representative per family by default: gaussian, uniform (sub-gaussian),
laplace (super-gaussian), weibull (skewed). Heavier than the white-noise
sweep; trim --nf/--a or lower --epochs for a quick look, or raise --workers.
"""

import argparse
import sys

sys.path.insert(0, "src")  # allow running from a fresh checkout

from specdenoise.cdae import TrainConfig
from specdenoise.dataset import build_synthetic
from specdenoise.noisegen import DistKind, Distribution
from specdenoise.sweep import SweepGrid, best_coloring, best_nf, emit_report, run_grid


def parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="runs/distribution_grid")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--count", type=int, default=16, help="dataset size")
    ap.add_argument("--size", type=int, default=64, help="square image side")
    ap.add_argument("--epochs", type=int, default=10)
    ap.add_argument("--dists", default="gaussian,uniform,laplace,weibull")
    ap.add_argument("--nf", default="0.1,0.3,0.5,0.7,0.9")
    ap.add_argument("--a", default="0.0,0.4,0.8")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--resume", action="store_true")
    args = ap.parse_args(argv)

    dists = tuple(Distribution(DistKind(name.strip()))
                  for name in args.dists.split(",") if name.strip())
    entries = build_synthetic(args.count, (args.size, args.size, 1), seed=args.seed)
    grid = SweepGrid(
        dataset=tuple(e.pixels for e in entries),
        distributions=dists,
        nf_values=parse_floats(args.nf),
        a_values=parse_floats(args.a),
        epochs_values=(args.epochs,),
        master_seed=args.seed,
        train_template=TrainConfig(epochs=args.epochs),
    )
    print(f"{grid.size} cells on {args.count} images, {args.workers} worker(s)")
    records = run_grid(grid, args.out, workers=args.workers, resume=args.resume)
    emit_report(records, args.out)

    for dist in dists:
        name = dist.kind.value
        white = best_nf(records, dist, a=0.0)
        coloring = best_coloring(records, dist)
        print(f"{name}: best white-noise NF {white.nf_values} "
              f"(loss {white.min_loss:.5f}); best coloring a={coloring.a} "
              f"(avg loss {coloring.avg_min_loss:.5f})")
    print(f"full report under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
