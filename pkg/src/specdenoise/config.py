"""Single source of configuration for the CLI.

Flat INI-style files: one `key = value` per line, dotted keys instead of
sections, `#`/`;` comment lines. Every key is declared in the registry below
with a type and default; unknown keys and unparsable values are hard errors.
Precedence: built-in default < environment (out/workers only) < config file
< command-line flag. The effective configuration is echoed to
<out_dir>/config.resolved by every command.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .cdae import TrainConfig
from .errors import ConfigError
from .noisegen import ColoringAxis, Distribution, DistKind, NoiseSpec
from .stft import StftConfig

ENV_OUT = "SPECDENOISE_OUT"
ENV_WORKERS = "SPECDENOISE_WORKERS"

_TENTHS_TEXT = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
_DIST_NAMES = sorted(k.value for k in DistKind)


@dataclass(frozen=True)
class Key:
    name: str
    kind: str  # int | float | bool | str | floats | ints | shape | choice
    default: str
    help: str
    choices: tuple[str, ...] = ()


KEYS: dict[str, Key] = {k.name: k for k in [
    Key("out", "str", "out", "output directory; all files land under it"),
    Key("seed", "int", "0", "master seed every derived stream hangs off"),
    Key("workers", "int", "1", "parallel workers for sweep cells"),
    Key("segment_len", "int", "300", "samples per segment"),
    Key("hop", "int", "0", "segment hop; 0 means hop = segment_len"),
    Key("axis", "choice", "z", "accelerometer axis to ingest", ("x", "y", "z")),
    Key("sample_rate_hz", "float", "100.0",
        "sample rate for synthesis/ingest; 0 derives it from the time column"),
    Key("column_map.x", "str", "ax", "CSV column holding the X axis"),
    Key("column_map.y", "str", "ay", "CSV column holding the Y axis"),
    Key("column_map.z", "str", "az", "CSV column holding the Z axis"),
    Key("column_map.t", "str", "t", "CSV column holding time, if any"),
    Key("stft.window_len", "int", "64", "STFT window length in samples"),
    Key("stft.overlap", "int", "32", "samples shared by adjacent windows"),
    Key("stft.window_kind", "choice", "hann", "window function",
        ("hann", "hamming", "rectangular")),
    Key("stft.fft_len", "int", "64", "FFT length (power of two, >= window)"),
    Key("stft.db_floor", "float", "-80.0", "spectrogram floor relative to peak, dB"),
    Key("dataset.dir", "str", "", "dataset directory; empty means <out>/dataset"),
    Key("dataset.count", "int", "48", "synthetic dataset size"),
    Key("dataset.shape", "shape", "64x64x1", "image shape HxWxC"),
    Key("dataset.bursts", "int", "4", "bursts per synthetic image"),
    Key("noise.dist", "choice", "gaussian", "noise distribution", tuple(_DIST_NAMES)),
    Key("noise.nf", "float", "0.3", "noise factor (noise power / signal power)"),
    Key("noise.a", "float", "0.0", "coloring parameter in [0, 1)"),
    Key("noise.axis", "choice", "time", "coloring axis over image pixels",
        ("time", "flattened")),
    Key("noise.weibull_k", "float", "1.5", "Weibull shape parameter"),
    Key("noise.preview_n", "int", "4096", "samples emitted by noise-preview"),
    Key("train.epochs", "int", "30", "training epochs"),
    Key("train.batch_size", "int", "8", "mini-batch size"),
    Key("train.lr", "float", "0.001", "Adam learning rate"),
    Key("train.loss", "choice", "mse", "training loss", ("mse", "bce")),
    Key("train.val_fraction", "float", "0.2", "validation fraction in (0, 1)"),
    Key("sweep.dists", "str", "gaussian", "comma list of sweep distributions"),
    Key("sweep.nf_values", "floats", _TENTHS_TEXT, "noise factors swept"),
    Key("sweep.a_values", "floats", _TENTHS_TEXT, "coloring values swept"),
    Key("sweep.epochs_values", "ints", "30", "epoch counts swept"),
    Key("sweep.tie_tolerance", "float", "5e-05", "loss tie tolerance in the optimum-NF table"),
    Key("gradcheck.shape", "shape", "16x16x1", "input shape for the gradcheck command"),
    Key("gradcheck.tolerance", "float", "1e-05", "max relative error allowed"),
]}


def _parse_bool(text: str, key: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {text!r}")


def parse_shape(text: str, key: str = "shape") -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"{key}: expected HxWxC like 64x64x1, got {text!r}") from None
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ConfigError(f"{key}: expected three positive dims, got {text!r}")
    return dims


def _convert(key: Key, text: str):
    text = text.strip()
    try:
        if key.kind == "int":
            return int(text)
        if key.kind == "float":
            return float(text)
        if key.kind == "bool":
            return _parse_bool(text, key.name)
        if key.kind == "floats":
            return tuple(float(p) for p in text.split(",") if p.strip())
        if key.kind == "ints":
            return tuple(int(p) for p in text.split(",") if p.strip())
        if key.kind == "shape":
            return parse_shape(text, key.name)
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{key.name}: cannot parse {text!r} as {key.kind}") from None
    if key.kind == "choice":
        low = text.lower()
        if low not in key.choices:
            raise ConfigError(
                f"{key.name}: {text!r} is not one of {', '.join(key.choices)}")
        return low
    return text


def _canonical(key: Key, value) -> str:
    if key.kind in ("floats", "ints"):
        return ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
    if key.kind == "shape":
        return "x".join(str(d) for d in value)
    if key.kind == "float":
        return repr(value)
    if key.kind == "bool":
        return "true" if value else "false"
    return str(value)


def read_config_file(path) -> dict[str, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if line.startswith("["):
            raise ConfigError(f"{path}:{lineno}: sections are not supported, use dotted keys")
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        name, _, value = line.partition("=")
        name = name.strip()
        if name not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {name!r}")
        out[name] = value.strip()
    return out


class Config:
    """Typed view over the merged key/value table."""

    def __init__(self, values: dict[str, object]):
        self._values = values

    def get(self, name: str):
        if name not in KEYS:
            raise ConfigError(f"unknown config key {name!r}")
        return self._values[name]

    def resolved_text(self) -> str:
        lines = [f"{name} = {_canonical(KEYS[name], self._values[name])}"
                 for name in sorted(KEYS)]
        return "\n".join(lines) + "\n"

    def write_resolved(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "config.resolved"), "w", encoding="utf-8") as fh:
            fh.write(self.resolved_text())


def resolve(file_values: dict[str, str] | None = None,
            overrides: dict[str, str] | None = None,
            environ: dict[str, str] | None = None) -> Config:
    """Merge defaults, environment, file, and flag overrides into a Config."""
    environ = os.environ if environ is None else environ
    texts = {name: key.default for name, key in KEYS.items()}
    if environ.get(ENV_OUT):
        texts["out"] = environ[ENV_OUT]
    if environ.get(ENV_WORKERS):
        texts["workers"] = environ[ENV_WORKERS]
    for name, value in (file_values or {}).items():
        if name not in KEYS:
            raise ConfigError(f"unknown config key {name!r}")
        texts[name] = value
    for name, value in (overrides or {}).items():
        if name not in KEYS:
            raise ConfigError(f"unknown config key {name!r}")
        texts[name] = value
    values = {name: _convert(KEYS[name], text) for name, text in texts.items()}
    return Config(values)


def help_text() -> str:
    lines = ["configuration keys (key = default):"]
    for name in sorted(KEYS):
        key = KEYS[name]
        extra = f" [{'|'.join(key.choices)}]" if key.choices else ""
        lines.append(f"  {name} = {key.default or '(empty)'}"
                     f"  {key.help}{extra}")
    return "\n".join(lines)


# --- typed builders used by the CLI ------------------------------------------------

def stft_config_from(cfg: Config) -> StftConfig:
    return StftConfig(
        window_len=cfg.get("stft.window_len"),
        overlap=cfg.get("stft.overlap"),
        window_kind=cfg.get("stft.window_kind"),
        fft_len=cfg.get("stft.fft_len"),
    )


def distribution_from(cfg: Config, name: str | None = None) -> Distribution:
    kind = DistKind(name if name is not None else cfg.get("noise.dist"))
    return Distribution(kind=kind, weibull_k=cfg.get("noise.weibull_k"))


def noise_spec_from(cfg: Config, seed: int) -> NoiseSpec:
    return NoiseSpec(
        dist=distribution_from(cfg),
        noise_factor=cfg.get("noise.nf"),
        coloring_a=cfg.get("noise.a"),
        seed=seed,
        coloring_axis=ColoringAxis(cfg.get("noise.axis")),
    )


def train_config_from(cfg: Config, seed: int) -> TrainConfig:
    return TrainConfig(
        epochs=cfg.get("train.epochs"),
        batch_size=cfg.get("train.batch_size"),
        lr=cfg.get("train.lr"),
        loss_kind=cfg.get("train.loss"),
        val_fraction=cfg.get("train.val_fraction"),
        seed=seed,
    )


def sweep_distributions_from(cfg: Config) -> tuple[Distribution, ...]:
    names = [p.strip() for p in str(cfg.get("sweep.dists")).split(",") if p.strip()]
    if not names:
        raise ConfigError("sweep.dists must name at least one distribution")
    dists = []
    for name in names:
        if name not in _DIST_NAMES:
            raise ConfigError(f"sweep.dists: {name!r} is not one of {', '.join(_DIST_NAMES)}")
        dists.append(Distribution(kind=DistKind(name), weibull_k=cfg.get("noise.weibull_k")))
    return tuple(dists)
