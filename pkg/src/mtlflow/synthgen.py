"""Deterministic synthetic 15-minute flow series with daily peak structure.

The deterministic part is a base flow plus two gaussian bumps per day
(morning and evening rush); on top sits a stationary AR(1) residual so
neighbouring samples stay correlated, which is what makes the extra
forecasting tasks informative.  Values are clipped at zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TimeSeries

POINTS_PER_DAY = 96  # 24h at 15-minute resolution


@dataclass(frozen=True)
class PeakShape:
    """One gaussian bump over the day: slot of the maximum, width, height."""

    center_slot: float
    width_slots: float
    amplitude: float

    def __post_init__(self) -> None:
        if self.width_slots <= 0:
            raise ValueError("width_slots must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")


@dataclass(frozen=True)
class SynthConfig:
    """Generator settings; every field is deterministic given the seed."""

    days: int = 25
    points_per_day: int = POINTS_PER_DAY
    base_flow: float = 300.0
    morning_peak: PeakShape = PeakShape(32.0, 6.0, 400.0)
    evening_peak: PeakShape = PeakShape(72.0, 8.0, 350.0)
    noise_std: float = 60.0
    ar_coeff: float = 0.6
    seed: int = 0

    def __post_init__(self) -> None:
        if self.days < 1:
            raise ValueError("days must be at least 1")
        if self.points_per_day != POINTS_PER_DAY:
            raise ValueError(f"points_per_day is fixed at {POINTS_PER_DAY}")
        if self.base_flow < 0:
            raise ValueError("base_flow must be non-negative")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        if not 0 <= self.ar_coeff < 1:
            raise ValueError("ar_coeff must lie in [0, 1)")

    @property
    def num_points(self) -> int:
        return self.days * self.points_per_day


def daily_profile(cfg: SynthConfig) -> np.ndarray:
    """Deterministic flow level for each slot of one day."""
    slots = np.arange(cfg.points_per_day, dtype=np.float64)
    profile = np.full(cfg.points_per_day, cfg.base_flow, dtype=np.float64)
    for peak in (cfg.morning_peak, cfg.evening_peak):
        z = (slots - peak.center_slot) / peak.width_slots
        profile += peak.amplitude * np.exp(-0.5 * z * z)
    return profile


def deterministic_component(cfg: SynthConfig) -> np.ndarray:
    """The noise-free series: the daily profile tiled over all days."""
    return np.tile(daily_profile(cfg), cfg.days)


def generate(cfg: SynthConfig, link_id: str = "Bb") -> TimeSeries:
    """Produce the synthetic series: profile + AR(1) residual, floored at 0.

    The AR(1) innovations have standard deviation
    noise_std * sqrt(1 - ar_coeff^2), so the residual's stationary standard
    deviation is noise_std.
    """
    n = cfg.num_points
    values = deterministic_component(cfg)
    if cfg.noise_std > 0:
        rng = np.random.default_rng(cfg.seed)
        innovations = rng.normal(
            0.0, cfg.noise_std * np.sqrt(1.0 - cfg.ar_coeff**2), size=n
        )
        residual = np.empty(n, dtype=np.float64)
        residual[0] = innovations[0]
        for t in range(1, n):
            residual[t] = cfg.ar_coeff * residual[t - 1] + innovations[t]
        values = values + residual
    return TimeSeries(link_id, np.maximum(values, 0.0))
