"""Seeded synthetic day-ahead scenarios: demand, wind and PV series.

Shapes:

* demand: two circular gaussian bumps (late morning and evening) plus 1 %
  seeded noise, rescaled so the trough sits at ``trough`` times the peak
  and the maximum equals ``peak_demand`` exactly;
* PV: half-sine from 06:00 to 18:00 reaching ``pv_capacity`` at noon,
  zero at night;
* wind: sum of three sinusoids with seeded phases and amplitudes (periods
  24, 12 and 8 h), rescaled into [0.2, 0.9] times ``wind_capacity``.

Step t (1-based) covers clock hour t - 1. A wind drop (a, b, f) multiplies
the wind of clock hours a..b inclusive by f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..domain import Scenario, UcdrError, validate_scenario


class InvalidSpec(UcdrError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 1
    peak_demand: float = 170.0
    pv_capacity: float = 30.0
    wind_capacity: float = 30.0
    wind_drop: tuple[int, int, float] | None = None
    horizon: int = 24
    trough: float = 0.6
    sigma_d: float = 0.0
    sigma_w: float = 3.0
    sigma_p: float = 3.0

    def validate(self) -> "ScenarioSpec":
        if self.horizon < 1:
            raise InvalidSpec("horizon must be at least one step")
        for name in ("peak_demand", "pv_capacity", "wind_capacity", "sigma_d", "sigma_w",
                     "sigma_p"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidSpec(f"{name} must be a non-negative number, got {v}")
        if not 0.0 < self.trough <= 1.0:
            raise InvalidSpec("trough must be a share of the peak in (0, 1]")
        if self.wind_drop is not None:
            a, b, f = self.wind_drop
            if not (0 <= a <= b <= self.horizon - 1):
                raise InvalidSpec(f"drop window {a}..{b} outside clock hours 0..{self.horizon - 1}")
            if not 0.0 <= f <= 1.0:
                raise InvalidSpec(f"residual fraction must lie in [0, 1], got {f}")
        return self


def _bump(hours, centre, width):
    d = np.abs(hours - centre)
    d = np.minimum(d, 24.0 - d)
    return np.exp(-d ** 2 / (2 * width * width))


def _unit_interval(x):
    span = x.max() - x.min()
    return np.zeros_like(x) if span == 0 else (x - x.min()) / span


def generate_scenario(spec: ScenarioSpec = ScenarioSpec()) -> Scenario:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    h = np.arange(spec.horizon, dtype=float) % 24.0

    shape = _bump(h, 11.5, 3.0) + 0.92 * _bump(h, 19.0, 2.2)
    shape = _unit_interval(shape + rng.normal(0.0, 0.01, h.size))
    demand = spec.peak_demand * (spec.trough + (1.0 - spec.trough) * shape)

    day = (h >= 6) & (h <= 18)
    pv = np.where(day, spec.pv_capacity * np.clip(np.sin(np.pi * (h - 6) / 12), 0, None), 0.0)

    phase = rng.uniform(0.0, 2 * np.pi, 3)
    amp = rng.uniform(0.5, 1.0, 3)
    x = sum(a * np.sin(2 * np.pi * h / period + ph)
            for a, ph, period in zip(amp, phase, (24.0, 12.0, 8.0)))
    wind = spec.wind_capacity * (0.2 + 0.7 * _unit_interval(x))
    if spec.wind_drop is not None:
        a, b, f = spec.wind_drop
        hour = np.arange(spec.horizon)
        wind = np.where((hour >= a) & (hour <= b), wind * f, wind)

    return validate_scenario(Scenario(demand, wind, pv, spec.sigma_d, spec.sigma_w,
                                      spec.sigma_p))
