"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Every key must be one of
:data:`KEYS`; values are converted with the listed type and then checked by
the :class:`~kljn.noise_gen.NoiseConfig` and
:class:`~kljn.harness.ExperimentConfig` constructors.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .channel import ResistorPair
from .harness import ExperimentConfig
from .noise_gen import NoiseConfig


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    return int(text.strip(), 0)


def _float(text: str) -> float:
    return float(text.strip())


KEYS = {
    # NoiseConfig
    "bandwidth_hz": _float,
    "temperature_k": _float,
    "raw_length": _int,
    "ensemble_count": _int,
    "oversample_factor": _int,
    # ResistorPair
    "r_low_ohm": _float,
    "r_high_ohm": _float,
    # ExperimentConfig
    "master_seed": _int,
    "trials": _int,
    "bep_samples": _int,
    "attack_mode": str.strip,
    "secure_only": _bool,
    "workers": _int,
    # single-run selections
    "trial_id": _int,
    "segment_length": _int,
}

NOISE_KEYS = ("bandwidth_hz", "temperature_k", "raw_length", "ensemble_count", "oversample_factor")
PAIR_KEYS = ("r_low_ohm", "r_high_ohm")
EXPERIMENT_KEYS = ("master_seed", "trials", "bep_samples", "attack_mode", "secure_only", "workers")


class ConfigKeyError(KeyError):
    def __init__(self, key: str, where: str = ""):
        super().__init__(key)
        self.key = key
        self.where = where

    def __str__(self):
        return f"unknown config key {self.key!r}" + (f" ({self.where})" if self.where else "")


class ConfigValueError(ValueError):
    def __init__(self, key: str, reason: str):
        super().__init__(f"{key}: {reason}")
        self.key = key


@dataclass(frozen=True)
class RunSettings:
    experiment: ExperimentConfig
    trial_id: int = 0
    segment_length: int = 1024

    @property
    def noise(self) -> NoiseConfig:
        return self.experiment.noise


def parse_text(text: str, where: str = "") -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigValueError(line, f"expected key=value at {where}:{lineno}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigKeyError(key, f"{where}:{lineno}" if where else "")
        values[key] = value
    return values


def load_file(path) -> dict[str, str]:
    path = Path(path)
    return parse_text(path.read_text(), str(path))


def default_text() -> str:
    return resources.files("kljn").joinpath("data/default.cfg").read_text()


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigValueError(item, "override must look like key=value")
    key, value = (part.strip() for part in item.split("=", 1))
    if key not in KEYS:
        raise ConfigKeyError(key, "--set")
    return key, value


def _convert(key: str, raw: str):
    try:
        return KEYS[key](raw)
    except ValueError as exc:
        raise ConfigValueError(key, str(exc)) from None


def _first_key(message: str, keys) -> str:
    for k in keys:
        if k in message:
            return k
    return keys[0]


def build_settings(values: dict[str, str]) -> RunSettings:
    """Convert raw strings and check every invariant."""
    typed = {k: _convert(k, v) for k, v in values.items()}
    noise_kw = {k: typed[k] for k in NOISE_KEYS if k in typed}
    pair_kw = {k: typed[k] for k in PAIR_KEYS if k in typed}
    exp_kw = {k: typed[k] for k in EXPERIMENT_KEYS if k in typed}
    try:
        noise = NoiseConfig(**noise_kw)
    except ValueError as exc:
        raise ConfigValueError(_first_key(str(exc), NOISE_KEYS), str(exc)) from None
    try:
        pair = ResistorPair(**pair_kw)
    except ValueError as exc:
        raise ConfigValueError(_first_key(str(exc), PAIR_KEYS), str(exc)) from None
    try:
        experiment = ExperimentConfig(noise=noise, pair=pair, **exp_kw)
    except ValueError as exc:
        raise ConfigValueError(_first_key(str(exc), EXPERIMENT_KEYS), str(exc)) from None

    trial_id = typed.get("trial_id", 0)
    if trial_id < 0:
        raise ConfigValueError("trial_id", "must be nonnegative")
    seg = typed.get("segment_length", 1024)
    if seg < 2 or seg & (seg - 1):
        raise ConfigValueError("segment_length", "must be a power of two")
    if seg > noise.raw_length * noise.oversample_factor:
        raise ConfigValueError("segment_length", "longer than the anti-aliased noise series")
    return RunSettings(experiment, trial_id, seg)


def resolve(config_path=None, overrides=(), seed=None) -> RunSettings:
    """Defaults, then the config file, then ``--set`` overrides, then ``--seed``."""
    values = parse_text(default_text(), "default.cfg")
    if config_path is not None:
        values.update(load_file(config_path))
    for item in overrides:
        key, value = parse_override(item)
        values[key] = value
    if seed is not None:
        values["master_seed"] = str(seed)
    return build_settings(values)
