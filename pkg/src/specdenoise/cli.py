"""Command-line entry point.

Commands: prepare, train, sweep, report, noise-preview, gradcheck. All
tunables come from the config file (see --help for the full key list); the
only flags are --config, --out, --seed, --workers, --resume, --paper-scale,
and the two environment variables SPECDENOISE_OUT / SPECDENOISE_WORKERS.

Exit codes: 0 ok, 1 usage/config, 2 data, 3 numeric failure, 4 sweep/report
errors. Every command writes all of its outputs under the output directory,
starting with config.resolved.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import cdae, config, dataset, netpbm, noisegen
from .errors import (
    ConfigError,
    DataError,
    InvalidParamError,
    NonFiniteLossError,
    NumericError,
    SpecDenoiseError,
)
from .nn import checkpoint, gradcheck
from .seeding import derive_seed, make_rng
from .stft import stft, to_image
from .sweep import SweepGrid, emit_report, records_from_csv, run_grid
from .timeseries import ingest_csv, segment

PAPER_COUNT_TEXT = "75"
PAPER_SHAPE_TEXT = "256x256x3"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specdenoise",
        description="Spectrogram denoising experiments: prepare data, add "
                    "calibrated colored noise, train a convolutional "
                    "auto-encoder, sweep parameter grids.",
        epilog=config.help_text(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, workers: bool = False) -> None:
        p.add_argument("--config", help="INI-style key=value config file")
        p.add_argument("--out", help="output directory (overrides config/env)")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--paper-scale", action="store_true",
                       help="75 images at 256x256x3 instead of the desk default")
        if workers:
            p.add_argument("--workers", type=int, help="parallel sweep workers")
            p.add_argument("--resume", action="store_true",
                           help="skip cells that already have records on disk")

    p = sub.add_parser("prepare", help="build the clean spectrogram dataset")
    p.add_argument("inputs", nargs="*", help="accelerometer CSV files; none = synthesize")
    common(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train one denoiser at the configured noise spec")
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run the distribution x NF x coloring grid")
    common(p, workers=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="rebuild tables and plots from a results.csv")
    p.add_argument("results", help="path to a previously written results.csv")
    common(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("noise-preview", help="emit a noise trace and its moments")
    common(p)
    p.set_defaults(func=cmd_noise_preview)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full model")
    common(p)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def _load_config(args) -> config.Config:
    file_values = config.read_config_file(args.config) if args.config else None
    overrides: dict[str, str] = {}
    if args.out is not None:
        overrides["out"] = args.out
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = str(args.workers)
    if args.paper_scale:
        overrides["dataset.count"] = PAPER_COUNT_TEXT
        overrides["dataset.shape"] = PAPER_SHAPE_TEXT
    return config.resolve(file_values, overrides)


def _rate(cfg: config.Config) -> float | None:
    rate = cfg.get("sample_rate_hz")
    return None if rate == 0 else rate


def _dataset_dir(cfg: config.Config) -> str:
    configured = cfg.get("dataset.dir")
    return configured if configured else os.path.join(cfg.get("out"), "dataset")


def _column_map(cfg: config.Config) -> dict[str, str]:
    return {axis: cfg.get(f"column_map.{axis}") for axis in ("x", "y", "z", "t")}


def _synthesize_entries(cfg: config.Config) -> list[dataset.DatasetEntry]:
    return dataset.build_synthetic(
        count=cfg.get("dataset.count"),
        shape=cfg.get("dataset.shape"),
        seed=cfg.get("seed"),
        segment_len=cfg.get("segment_len"),
        sample_rate_hz=cfg.get("sample_rate_hz") or 100.0,
        stft_config=config.stft_config_from(cfg),
        burst_count=cfg.get("dataset.bursts"),
        db_floor=cfg.get("stft.db_floor"),
    )


def cmd_prepare(args, cfg: config.Config) -> int:
    out = cfg.get("out")
    cfg.write_resolved(out)
    if args.inputs:
        entries = []
        stft_cfg = config.stft_config_from(cfg)
        shape = cfg.get("dataset.shape")
        hop = cfg.get("hop") or None
        for path in args.inputs:
            series = ingest_csv(path, axis=cfg.get("axis"), sample_rate_hz=_rate(cfg),
                                column_map=_column_map(cfg))
            source = os.path.basename(path)
            for seg in segment(series, segment_len=cfg.get("segment_len"),
                               hop=hop, source_id=source):
                grid = stft(seg, stft_cfg, sample_rate_hz=series.sample_rate_hz)
                image = to_image(grid, shape=shape, db_floor=cfg.get("stft.db_floor"),
                                 source_id=seg.source_id)
                entries.append(dataset.DatasetEntry(
                    image_id=f"img_{len(entries):04d}",
                    source=source, offset=seg.offset, pixels=image.pixels))
        if not entries:
            raise DataError("inputs produced no segments")
    else:
        entries = _synthesize_entries(cfg)
    target = _dataset_dir(cfg)
    dataset.save_dataset(entries, target)
    print(f"prepare: wrote {len(entries)} images to {target}")
    return 0


def _load_or_synthesize(cfg: config.Config) -> list[np.ndarray]:
    target = _dataset_dir(cfg)
    if os.path.isfile(os.path.join(target, "manifest.csv")):
        return [e.pixels for e in dataset.load_dataset(target)]
    return [e.pixels for e in _synthesize_entries(cfg)]


def cmd_train(args, cfg: config.Config) -> int:
    out = cfg.get("out")
    cfg.write_resolved(out)
    seed = cfg.get("seed")
    images = [e.pixels for e in dataset.load_dataset(_dataset_dir(cfg))]

    noisy = []
    for i, img in enumerate(images):
        spec = config.noise_spec_from(cfg, seed=derive_seed(seed, "noise", i))
        noisy.append(noisegen.inject(img, spec))
    model = cdae.build(images[0].shape, seed=derive_seed(seed, "model"))
    train_cfg = config.train_config_from(cfg, seed=derive_seed(seed, "train"))

    def write_trace(trace) -> None:
        rows = ["epoch,train_loss,val_loss,wall_time_s"]
        rows += [f"{t.epoch},{t.train_loss!r},{t.val_loss!r},{t.wall_time_s!r}"
                 for t in trace]
        with open(os.path.join(out, "trace.csv"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(rows) + "\n")

    try:
        trace = cdae.train(model, list(zip(noisy, images)), train_cfg)
    except NonFiniteLossError as exc:
        write_trace(exc.trace)
        raise
    write_trace(trace)
    checkpoint.save(model.net, os.path.join(out, "model.ckpt"))

    _, val_idx = cdae.split_indices(len(images), train_cfg.val_fraction, train_cfg.seed)
    channels = images[0].shape[2]
    ext = "ppm" if channels == 3 else "pgm"
    for k, idx in enumerate(val_idx[:4]):
        restored = cdae.denoise(model, noisy[idx])
        for role, pixels in (("clean", images[idx]), ("noisy", noisy[idx]),
                             ("denoised", restored)):
            netpbm.write(pixels, os.path.join(out, f"sample_{k}_{role}.{ext}"))

    best = cdae.min_loss(trace)
    print(f"train: min val loss {best.value!r} at epoch {best.epoch}; "
          f"trace, checkpoint, and samples under {out}")
    return 0


def cmd_sweep(args, cfg: config.Config) -> int:
    out = cfg.get("out")
    cfg.write_resolved(out)
    images = _load_or_synthesize(cfg)
    grid = SweepGrid(
        dataset=tuple(images),
        distributions=config.sweep_distributions_from(cfg),
        nf_values=cfg.get("sweep.nf_values"),
        a_values=cfg.get("sweep.a_values"),
        epochs_values=cfg.get("sweep.epochs_values"),
        master_seed=cfg.get("seed"),
        train_template=config.train_config_from(cfg, seed=0),
        coloring_axis=noisegen.ColoringAxis(cfg.get("noise.axis")),
    )
    records = run_grid(grid, out, workers=cfg.get("workers"),
                       resume=bool(getattr(args, "resume", False)))
    emit_report(records, out, tie_tolerance=cfg.get("sweep.tie_tolerance"))
    failed = sum(1 for r in records if r.status != "ok")
    print(f"sweep: {len(records)} cells ({failed} failed); report under {out}")
    return 0


def cmd_report(args, cfg: config.Config) -> int:
    out = cfg.get("out")
    cfg.write_resolved(out)
    records = records_from_csv(args.results)
    emit_report(records, out, tie_tolerance=cfg.get("sweep.tie_tolerance"))
    print(f"report: rebuilt tables and charts for {len(records)} records under {out}")
    return 0


def cmd_noise_preview(args, cfg: config.Config) -> int:
    out = cfg.get("out")
    cfg.write_resolved(out)
    n = cfg.get("noise.preview_n")
    # a 1-D preview has no image rows, so color the flattened sequence
    spec = dataclasses.replace(config.noise_spec_from(cfg, seed=cfg.get("seed")),
                               coloring_axis=noisegen.ColoringAxis.FLATTENED)
    trace = noisegen.sample_field(spec, (n,))
    with open(os.path.join(out, "noise_preview.csv"), "w", encoding="utf-8") as fh:
        fh.write("index,value\n")
        fh.write("\n".join(f"{i},{v!r}" for i, v in enumerate(trace.tolist())) + "\n")
    moments = noisegen.estimate_moments(trace)
    rows = [("mean", moments.mean), ("variance", moments.variance),
            ("skewness", moments.skewness), ("excess_kurtosis", moments.excess_kurtosis)]
    with open(os.path.join(out, "noise_moments.csv"), "w", encoding="utf-8") as fh:
        fh.write("stat,value\n")
        fh.write("\n".join(f"{k},{v!r}" for k, v in rows) + "\n")
    for k, v in rows:
        print(f"{k}: {v!r}")
    return 0


def cmd_gradcheck(args, cfg: config.Config) -> int:
    out = cfg.get("out")
    cfg.write_resolved(out)
    seed = cfg.get("seed")
    shape = cfg.get("gradcheck.shape")
    tolerance = cfg.get("gradcheck.tolerance")
    lines = []
    worst = 0.0
    for loss in ("mse", "bce"):
        model = cdae.build(shape, seed=derive_seed(seed, "model", loss))
        rng = make_rng(derive_seed(seed, "gradcheck-data", loss))
        x = rng.random((1, *shape))
        target = rng.random((1, *shape))
        err = gradcheck(model, x, target, loss=loss, seed=seed)
        worst = max(worst, err)
        lines.append(f"{loss}: max relative error {err:.3e}")
    lines.append(f"tolerance: {tolerance:.3e}")
    verdict = "PASS" if worst < tolerance else "FAIL"
    lines.append(f"verdict: {verdict}")
    with open(os.path.join(out, "gradcheck.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    return 0 if verdict == "PASS" else 3


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (None, 0):
            return 0
        return 1  # argparse usage errors exit 2 by convention; ours is 1
    try:
        cfg = _load_config(args)
        return args.func(args, cfg)
    except (ConfigError, InvalidParamError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except SpecDenoiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4 if args.command in ("sweep", "report") else 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
