"""Plant, scenario, tariff and chance-constraint data types.

All types are frozen dataclasses; validation helpers return the object
unchanged when it is consistent and raise otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np


class UcdrError(Exception):
    """Base class for all toolkit errors."""


class InvalidUnit(UcdrError):
    def __init__(self, unit_id, reason):
        self.unit_id = unit_id
        self.reason = reason
        super().__init__(f"unit {unit_id}: {reason}")


class InvalidFleet(UcdrError):
    pass


class LengthMismatch(UcdrError):
    def __init__(self, series, expected, got):
        self.series = series
        super().__init__(f"series '{series}' has length {got}, expected {expected}")


class NegativeValue(UcdrError):
    def __init__(self, series, index, value=None):
        self.series = series
        self.index = index
        super().__init__(f"series '{series}' is negative at index {index} ({value})")


class InvalidScenario(UcdrError):
    pass


class InvalidTariff(UcdrError):
    pass


class InvalidInitialState(UcdrError):
    pass


class IndexOutOfRange(UcdrError):
    pass


class QuantileDomain(UcdrError):
    def __init__(self, alpha):
        self.alpha = alpha
        super().__init__(f"probability {alpha!r} is outside the open interval (0, 1)")


class DimensionMismatch(UcdrError):
    pass


@dataclass(frozen=True)
class ThermalUnit:
    id: int
    fuel_cost_b: float       # cost per MWh
    startup_cost_S: float    # cost per start
    p_max: float             # MW
    p_min: float             # MW
    ramp_up: float           # MW per step
    ramp_down: float         # MW per step
    min_up: int              # steps
    min_down: int            # steps


@dataclass(frozen=True)
class Fleet:
    units: tuple[ThermalUnit, ...]

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))

    def __len__(self):
        return len(self.units)

    def __iter__(self):
        return iter(self.units)

    def __getitem__(self, i):
        return self.units[i]

    @property
    def N(self) -> int:
        return len(self.units)

    def column(self, name: str) -> np.ndarray:
        """Attribute `name` of every unit as a float array in fleet order."""
        return np.array([getattr(u, name) for u in self.units], dtype=float)

    def with_ramp_fraction(self) -> "Fleet":
        """Reinterpret ramp rates as fractions of p_max per step."""
        return Fleet(tuple(replace(u, ramp_up=u.ramp_up * u.p_max,
                                   ramp_down=u.ramp_down * u.p_max)
                           for u in self.units))


@dataclass(frozen=True)
class Scenario:
    demand: tuple[float, ...]
    wind: tuple[float, ...]
    pv: tuple[float, ...]
    sigma_d: float = 0.0
    sigma_w: float = 0.0
    sigma_p: float = 0.0
    step_hours: float = 1.0
    horizon_T: int | None = None

    def __post_init__(self):
        for name in ("demand", "wind", "pv"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.horizon_T is None:
            object.__setattr__(self, "horizon_T", len(self.demand))

    @property
    def T(self) -> int:
        return self.horizon_T

    @property
    def sigmas(self) -> tuple[float, float, float]:
        return (self.sigma_d, self.sigma_w, self.sigma_p)

    def net_load(self) -> np.ndarray:
        return np.asarray(self.demand) - np.asarray(self.wind) - np.asarray(self.pv)

    def with_sigmas(self, sigma_d=None, sigma_w=None, sigma_p=None) -> "Scenario":
        return replace(
            self,
            sigma_d=self.sigma_d if sigma_d is None else float(sigma_d),
            sigma_w=self.sigma_w if sigma_w is None else float(sigma_w),
            sigma_p=self.sigma_p if sigma_p is None else float(sigma_p),
        )


@dataclass(frozen=True)
class Tariff:
    mean_price_rbar: float
    levels: tuple[float, ...]
    elasticity_eps: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(r) for r in self.levels))

    @property
    def L(self) -> int:
        return len(self.levels)

    def demand_factors(self) -> np.ndarray:
        """(r^l / rbar)^eps for every level, in level order."""
        ratio = np.asarray(self.levels) / self.mean_price_rbar
        return ratio ** self.elasticity_eps

    @classmethod
    def from_multipliers(cls, rbar, multipliers, elasticity=0.0) -> "Tariff":
        return cls(rbar, tuple(rbar * m for m in multipliers), elasticity)


class Distribution(str, Enum):
    NORMAL = "normal"
    LAPLACE = "laplace"
    DETERMINISTIC = "none"

    @classmethod
    def parse(cls, text) -> "Distribution":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {"normal": cls.NORMAL, "gauss": cls.NORMAL, "gaussian": cls.NORMAL,
                   "laplace": cls.LAPLACE,
                   "none": cls.DETERMINISTIC, "deterministic": cls.DETERMINISTIC}
        if key not in aliases:
            raise ValueError(f"unknown distribution {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class ChanceSpec:
    alpha: float = 0.90
    distribution: Distribution = Distribution.NORMAL

    def __post_init__(self):
        object.__setattr__(self, "distribution", Distribution.parse(self.distribution))
        if self.distribution is not Distribution.DETERMINISTIC:
            if not (0.0 < self.alpha < 1.0) or math.isnan(self.alpha):
                raise QuantileDomain(self.alpha)

    @classmethod
    def deterministic(cls) -> "ChanceSpec":
        return cls(0.5, Distribution.DETERMINISTIC)

    @property
    def is_deterministic(self) -> bool:
        return self.distribution is Distribution.DETERMINISTIC


@dataclass(frozen=True)
class UnitState:
    committed_u0: int = 0
    output_p0: float = 0.0
    run_length: int = 1   # steps elapsed since the last state change


@dataclass(frozen=True)
class InitialState:
    units: tuple[UnitState, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))

    def __len__(self):
        return len(self.units)

    def __getitem__(self, i):
        return self.units[i]

    @classmethod
    def all_off(cls, fleet: Fleet) -> "InitialState":
        """Every unit off long enough that no history constraint binds."""
        return cls(tuple(UnitState(0, 0.0, max(1, u.min_down)) for u in fleet))


def validate_fleet(fleet: Fleet) -> Fleet:
    if len(fleet.units) < 1:
        raise InvalidFleet("fleet must contain at least one unit")
    seen = set()
    for u in fleet.units:
        _check_unit(u)
        if u.id in seen:
            raise InvalidUnit(u.id, "duplicate id")
        seen.add(u.id)
    return fleet


def _check_unit(u: ThermalUnit) -> None:
    numbers = ("fuel_cost_b", "startup_cost_S", "p_max", "p_min", "ramp_up", "ramp_down")
    for name in numbers:
        if not math.isfinite(getattr(u, name)):
            raise InvalidUnit(u.id, f"{name} is not finite")
    if u.p_min < 0:
        raise InvalidUnit(u.id, "p_min must be >= 0")
    if u.p_min > u.p_max:
        raise InvalidUnit(u.id, "p_min must not exceed p_max")
    if u.ramp_up <= 0:
        raise InvalidUnit(u.id, "ramp_up must be > 0")
    if u.ramp_down <= 0:
        raise InvalidUnit(u.id, "ramp_down must be > 0")
    if u.min_up < 1 or int(u.min_up) != u.min_up:
        raise InvalidUnit(u.id, "min_up must be an integer >= 1")
    if u.min_down < 1 or int(u.min_down) != u.min_down:
        raise InvalidUnit(u.id, "min_down must be an integer >= 1")
    if u.fuel_cost_b < 0:
        raise InvalidUnit(u.id, "fuel_cost_b must be >= 0")
    if u.startup_cost_S < 0:
        raise InvalidUnit(u.id, "startup_cost_S must be >= 0")


def validate_scenario(scenario: Scenario) -> Scenario:
    T = scenario.horizon_T
    if T is None or T < 1:
        raise InvalidScenario("horizon must be at least one step")
    for name in ("demand", "wind", "pv"):
        series = getattr(scenario, name)
        if len(series) != T:
            raise LengthMismatch(name, T, len(series))
        for k, v in enumerate(series):
            if not math.isfinite(v):
                raise InvalidScenario(f"series '{name}' is not finite at index {k}")
            if v < 0:
                raise NegativeValue(name, k, v)
    for name in ("sigma_d", "sigma_w", "sigma_p"):
        v = getattr(scenario, name)
        if not math.isfinite(v) or v < 0:
            raise NegativeValue(name, 0, v)
    if not scenario.step_hours > 0:
        raise InvalidScenario("step_hours must be positive")
    return scenario


def validate_tariff(tariff: Tariff) -> Tariff:
    levels = tariff.levels
    if len(levels) < 1:
        raise InvalidTariff("at least one price level is required")
    if any(not math.isfinite(r) or r <= 0 for r in levels):
        raise InvalidTariff("price levels must be positive and finite")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise InvalidTariff("price levels must be strictly increasing")
    rbar = tariff.mean_price_rbar
    if not math.isfinite(rbar) or rbar <= 0:
        raise InvalidTariff("mean price must be positive")
    if not (levels[0] <= rbar <= levels[-1]):
        raise InvalidTariff("mean price must lie between the lowest and highest level")
    if not math.isfinite(tariff.elasticity_eps) or tariff.elasticity_eps > 0:
        raise InvalidTariff("elasticity must be <= 0")
    return tariff


def validate_initial_state(init: InitialState, fleet: Fleet) -> InitialState:
    if len(init) != len(fleet):
        raise DimensionMismatch(f"initial state has {len(init)} units, fleet has {len(fleet)}")
    for unit, st in zip(fleet, init):
        if st.committed_u0 not in (0, 1):
            raise InvalidInitialState(f"unit {unit.id}: committed_u0 must be 0 or 1")
        if st.run_length < 1 or int(st.run_length) != st.run_length:
            raise InvalidInitialState(f"unit {unit.id}: run_length must be an integer >= 1")
        if st.committed_u0 == 1:
            if not (unit.p_min <= st.output_p0 <= unit.p_max):
                raise InvalidInitialState(
                    f"unit {unit.id}: committed output {st.output_p0} outside [p_min, p_max]")
        elif st.output_p0 != 0:
            raise InvalidInitialState(f"unit {unit.id}: decommitted unit must have output 0")
    return init


def demand_factor(level_index: int, tariff: Tariff) -> float:
    """Demand multiplier (r^l / rbar)^eps for a 1-based price level index."""
    if not (1 <= level_index <= tariff.L):
        raise IndexOutOfRange(f"level index {level_index} outside 1..{tariff.L}")
    r = tariff.levels[level_index - 1]
    return (r / tariff.mean_price_rbar) ** tariff.elasticity_eps


# The bundled reference fleet: (id, b, p_max, p_min, ramp_up, ramp_down, min_up, min_down, S)
_TABLE_I: Sequence[tuple] = (
    (1, 3.0, 50.0, 25.0, 0.5, 0.5, 3, 3, 1000.0),
    (2, 3.0, 50.0, 25.0, 0.5, 0.5, 3, 3, 1000.0),
    (3, 3.3, 15.0, 7.5, 0.5, 0.5, 3, 3, 200.0),
    (4, 3.3, 15.0, 7.5, 0.5, 0.5, 3, 3, 200.0),
    (5, 4.3, 6.0, 2.0, 5.0, 5.0, 3, 3, 100.0),
    (6, 4.3, 6.0, 2.0, 5.0, 5.0, 3, 3, 100.0),
    (7, 4.3, 6.0, 2.0, 5.0, 5.0, 3, 3, 100.0),
    (8, 7.1, 10.0, 4.0, 5.0, 5.0, 3, 3, 200.0),
    (9, 7.1, 10.0, 4.0, 5.0, 5.0, 3, 3, 200.0),
    (10, 7.1, 10.0, 4.0, 5.0, 5.0, 3, 3, 200.0),
    (11, 9.0, 5.0, 2.5, 0.5, 0.5, 3, 3, 100.0),
    (12, 9.0, 5.0, 2.5, 0.5, 0.5, 3, 3, 100.0),
)


def table1_fleet() -> Fleet:
    """The twelve-unit reference fleet, numbered in merit order."""
    units = tuple(
        ThermalUnit(id=i, fuel_cost_b=b, startup_cost_S=S, p_max=pmax, p_min=pmin,
                    ramp_up=ru, ramp_down=rd, min_up=tu, min_down=td)
        for (i, b, pmax, pmin, ru, rd, tu, td, S) in _TABLE_I
    )
    return validate_fleet(Fleet(units))


def default_tariff(elasticity: float = 0.0, rbar: float = 10.0,
                   multipliers=(0.7, 0.85, 1.0, 1.15, 1.3)) -> Tariff:
    return validate_tariff(Tariff.from_multipliers(rbar, multipliers, elasticity))
