"""Run configuration: plain-text key=value lines, one file for everything.

A single file drives the generator, the trainer, and the comparison
protocol so that experiment arms stay honest.  Unknown keys are rejected.
Per-link overrides use the prefix form ``link.<link_id>.<key>=<value>``
and may override any trainer key plus window_len, hidden_units, and
train_count.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .synthgen import PeakShape, SynthConfig
from .trainer import LmConfig

# Keys that map straight onto SynthConfig fields.
_SYNTH_KEYS = {
    "days": int,
    "points_per_day": int,
    "base_flow": float,
    "noise_std": float,
    "ar_coeff": float,
    "gen_seed": int,
}
_PEAK_KEYS = {
    "morning_center": float,
    "morning_width": float,
    "morning_amplitude": float,
    "evening_center": float,
    "evening_width": float,
    "evening_amplitude": float,
}
_TRAINER_KEYS = {
    "mu_init": float,
    "mu_inc": float,
    "mu_dec": float,
    "mu_max": float,
    "max_epochs": int,
    "error_goal": float,
    "seed": int,
}
_EXPERIMENT_KEYS = {
    "window_len": int,
    "hidden_units": int,
    "train_count": int,
}
_TEXT_KEYS = {"link_id"}

_OVERRIDABLE = set(_TRAINER_KEYS) | set(_EXPERIMENT_KEYS)


@dataclass(frozen=True)
class RunConfig:
    """Parsed configuration for the whole pipeline."""

    synth: SynthConfig = SynthConfig()
    trainer: LmConfig = LmConfig()
    window_len: int = 5
    hidden_units: int = 15
    train_count: int = 2112
    link_id: str = "Bb"
    per_link: dict[str, dict[str, object]] = field(default_factory=dict)


def default_config() -> RunConfig:
    """Built-in defaults, used when no config file is given."""
    return RunConfig()


def _convert(key: str, text: str, caster, lineno: int):
    try:
        return caster(text)
    except ValueError:
        raise ValueError(f"line {lineno}: bad value {text!r} for key {key!r}") from None


def parse_config(text: str) -> RunConfig:
    """Parse key=value lines; '#' starts a comment, blanks are ignored."""
    synth_kwargs: dict[str, object] = {}
    peaks: dict[str, float] = {}
    trainer_kwargs: dict[str, object] = {}
    experiment_kwargs: dict[str, object] = {}
    link_id = None
    per_link: dict[str, dict[str, object]] = {}
    seen: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)

        if key.startswith("link."):
            parts = key.split(".")
            if len(parts) != 3 or not parts[1] or not parts[2]:
                raise ValueError(f"line {lineno}: override key must be link.<id>.<key>")
            _, override_link, override_key = parts
            if override_key not in _OVERRIDABLE:
                raise ValueError(f"line {lineno}: key {override_key!r} cannot be overridden per link")
            caster = _TRAINER_KEYS.get(override_key) or _EXPERIMENT_KEYS[override_key]
            per_link.setdefault(override_link, {})[override_key] = _convert(key, value, caster, lineno)
        elif key in _SYNTH_KEYS:
            target = "seed" if key == "gen_seed" else key
            synth_kwargs[target] = _convert(key, value, _SYNTH_KEYS[key], lineno)
        elif key in _PEAK_KEYS:
            peaks[key] = _convert(key, value, _PEAK_KEYS[key], lineno)
        elif key in _TRAINER_KEYS:
            trainer_kwargs[key] = _convert(key, value, _TRAINER_KEYS[key], lineno)
        elif key in _EXPERIMENT_KEYS:
            experiment_kwargs[key] = _convert(key, value, _EXPERIMENT_KEYS[key], lineno)
        elif key in _TEXT_KEYS:
            if not value:
                raise ValueError(f"line {lineno}: {key} must be non-empty")
            link_id = value
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")

    defaults = SynthConfig()
    morning = PeakShape(
        peaks.get("morning_center", defaults.morning_peak.center_slot),
        peaks.get("morning_width", defaults.morning_peak.width_slots),
        peaks.get("morning_amplitude", defaults.morning_peak.amplitude),
    )
    evening = PeakShape(
        peaks.get("evening_center", defaults.evening_peak.center_slot),
        peaks.get("evening_width", defaults.evening_peak.width_slots),
        peaks.get("evening_amplitude", defaults.evening_peak.amplitude),
    )
    synth = replace(defaults, morning_peak=morning, evening_peak=evening, **synth_kwargs)
    trainer = LmConfig(**trainer_kwargs)
    return RunConfig(
        synth=synth,
        trainer=trainer,
        link_id=link_id if link_id is not None else RunConfig.link_id,
        per_link=per_link,
        **experiment_kwargs,
    )


def load_config(path) -> RunConfig:
    """Read and parse a config file; errors carry the file path."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    try:
        return parse_config(text)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def resolve_link(cfg: RunConfig, link_id: str) -> RunConfig:
    """Apply any per-link overrides, returning a flat config for that link."""
    overrides = cfg.per_link.get(link_id)
    if not overrides:
        return cfg
    trainer_over = {k: v for k, v in overrides.items() if k in _TRAINER_KEYS}
    experiment_over = {k: v for k, v in overrides.items() if k in _EXPERIMENT_KEYS}
    return replace(
        cfg,
        trainer=replace(cfg.trainer, **trainer_over) if trainer_over else cfg.trainer,
        **experiment_over,
    )


def format_config(cfg: RunConfig) -> str:
    """Render a RunConfig back to the key=value file format."""
    synth = cfg.synth
    lines = [
        "# generator",
        f"days={synth.days}",
        f"points_per_day={synth.points_per_day}",
        f"base_flow={synth.base_flow!r}",
        f"morning_center={synth.morning_peak.center_slot!r}",
        f"morning_width={synth.morning_peak.width_slots!r}",
        f"morning_amplitude={synth.morning_peak.amplitude!r}",
        f"evening_center={synth.evening_peak.center_slot!r}",
        f"evening_width={synth.evening_peak.width_slots!r}",
        f"evening_amplitude={synth.evening_peak.amplitude!r}",
        f"noise_std={synth.noise_std!r}",
        f"ar_coeff={synth.ar_coeff!r}",
        f"gen_seed={synth.seed}",
        f"link_id={cfg.link_id}",
        "# trainer",
    ]
    for f_ in fields(LmConfig):
        value = getattr(cfg.trainer, f_.name)
        lines.append(f"{f_.name}={value!r}" if isinstance(value, float) else f"{f_.name}={value}")
    lines += [
        "# experiment",
        f"window_len={cfg.window_len}",
        f"hidden_units={cfg.hidden_units}",
        f"train_count={cfg.train_count}",
    ]
    for link, overrides in sorted(cfg.per_link.items()):
        for key, value in sorted(overrides.items()):
            lines.append(f"link.{link}.{key}={value!r}" if isinstance(value, float) else f"link.{link}.{key}={value}")
    return "\n".join(lines) + "\n"
