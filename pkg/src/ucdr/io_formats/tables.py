"""Fleet CSV, scenario CSV and case-config key-value files.

Fleet file: one header line ``id,b,p_max,p_min,ramp_up,ramp_down,min_up,min_down,S``
followed by one row per unit. Columns map to fuel cost b_i (cost/MWh),
capacity limits (MW), ramp rates (MW per step, or a share of p_max when the
case sets ``ramp_fraction = true``), minimum up/down times (steps) and the
startup cost S_i (cost per start).

Scenario file: optional ``key = value`` lines for ``sigma_d``, ``sigma_w``,
``sigma_p`` (MW) and ``step_hours``, then the header ``t,demand,wind,pv`` and
one row per step with t running 1..T.

Lines starting with ``#`` and blank lines are ignored everywhere. Decimal
commas are never accepted.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..branch_bound import SearchConfig
from ..domain import (ChanceSpec, Distribution, Fleet, InitialState, Scenario, Tariff,
                      ThermalUnit, UcdrError, UnitState, default_tariff, validate_fleet,
                      validate_initial_state, validate_scenario, validate_tariff)

FLEET_COLUMNS = ("id", "b", "p_max", "p_min", "ramp_up", "ramp_down", "min_up", "min_down", "S")
SCENARIO_COLUMNS = ("t", "demand", "wind", "pv")
_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class ParseError(UcdrError):
    def __init__(self, line, column, reason):
        self.line = line
        self.column = column
        self.reason = reason
        where = f"line {line}" + (f", column '{column}'" if column is not None else "")
        super().__init__(f"{where}: {reason}")


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UcdrError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _content_lines(text):
    """(line number, stripped text) for every non-blank, non-comment line."""
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield k, line


def _number(token, line, column, integer=False):
    s = token.strip()
    if not _NUMBER.match(s):
        raise ParseError(line, column, f"not a number: {token!r}")
    if integer:
        v = float(s)
        if v != int(v):
            raise ParseError(line, column, f"expected an integer, got {token!r}")
        return int(v)
    v = float(s)
    if not math.isfinite(v):
        raise ParseError(line, column, f"not finite: {token!r}")
    return v


def _split(line):
    return next(csv.reader([line]))


def _header(fields, expected, line):
    names = [f.strip() for f in fields]
    missing = [c for c in expected if c not in names]
    if missing:
        raise ParseError(line, missing[0], f"header lacks column '{missing[0]}'")
    extra = [c for c in names if c not in expected]
    if extra:
        raise ParseError(line, extra[0], f"unknown column '{extra[0]}'")
    if len(set(names)) != len(names):
        raise ParseError(line, None, "duplicated column in header")
    return names


def _fmt(v) -> str:
    """Shortest text that parses back to the same float."""
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


# fleet -----------------------------------------------------------------------

def load_fleet(text: str, ramp_fraction: bool = False) -> Fleet:
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, None, "empty fleet file")
    k0, head = lines[0]
    names = _header(_split(head), FLEET_COLUMNS, k0)
    units = []
    for k, line in lines[1:]:
        fields = _split(line)
        if len(fields) != len(names):
            raise ParseError(k, None, f"expected {len(names)} fields, found {len(fields)}")
        row = {}
        for name, tok in zip(names, fields):
            row[name] = _number(tok, k, name, integer=name in ("id", "min_up", "min_down"))
        units.append(ThermalUnit(
            id=row["id"], fuel_cost_b=row["b"], startup_cost_S=row["S"],
            p_max=row["p_max"], p_min=row["p_min"], ramp_up=row["ramp_up"],
            ramp_down=row["ramp_down"], min_up=row["min_up"], min_down=row["min_down"]))
    fleet = Fleet(tuple(units))
    if ramp_fraction:
        fleet = fleet.with_ramp_fraction()
    return validate_fleet(fleet)


def dump_fleet(fleet: Fleet) -> str:
    out = [",".join(FLEET_COLUMNS)]
    for u in fleet:
        vals = (u.id, u.fuel_cost_b, u.p_max, u.p_min, u.ramp_up, u.ramp_down,
                u.min_up, u.min_down, u.startup_cost_S)
        out.append(",".join(_fmt(v) for v in vals))
    return "\n".join(out) + "\n"


# scenario --------------------------------------------------------------------

_SCENARIO_KEYS = ("sigma_d", "sigma_w", "sigma_p", "step_hours")


def load_scenario(text: str) -> Scenario:
    meta = {}
    header = None
    rows = {}
    for k, line in _content_lines(text):
        if header is None:
            if "=" in line:
                key, _, val = (s.strip() for s in line.partition("="))
                if key not in _SCENARIO_KEYS:
                    raise ParseError(k, key, f"unknown scenario key '{key}'")
                if key in meta:
                    raise ParseError(k, key, f"'{key}' given twice")
                meta[key] = _number(val, k, key)
                continue
            header = _header(_split(line), SCENARIO_COLUMNS, k)
            continue
        fields = _split(line)
        if len(fields) != len(header):
            raise ParseError(k, None, f"expected {len(header)} fields, found {len(fields)}")
        row = {name: tok for name, tok in zip(header, fields)}
        t = _number(row["t"], k, "t", integer=True)
        if t in rows:
            raise ParseError(k, "t", f"hour index {t} appears twice")
        rows[t] = (k, {c: _number(row[c], k, c) for c in SCENARIO_COLUMNS[1:]})
    if header is None:
        raise ParseError(1, None, "scenario file has no header line")
    if not rows:
        raise ParseError(1, None, "scenario file has no data rows")
    T = len(rows)
    for t, (k, _) in rows.items():
        if not 1 <= t <= T:
            raise ParseError(k, "t", f"hour index {t} outside 1..{T}")
    series = [rows[t][1] for t in range(1, T + 1)]
    sc = Scenario(
        demand=[r["demand"] for r in series], wind=[r["wind"] for r in series],
        pv=[r["pv"] for r in series],
        sigma_d=meta.get("sigma_d", 0.0), sigma_w=meta.get("sigma_w", 0.0),
        sigma_p=meta.get("sigma_p", 0.0), step_hours=meta.get("step_hours", 1.0))
    return validate_scenario(sc)


def dump_scenario(scenario: Scenario) -> str:
    out = [f"sigma_d = {_fmt(scenario.sigma_d)}", f"sigma_w = {_fmt(scenario.sigma_w)}",
           f"sigma_p = {_fmt(scenario.sigma_p)}"]
    if scenario.step_hours != 1.0:
        out.append(f"step_hours = {_fmt(scenario.step_hours)}")
    out.append(",".join(SCENARIO_COLUMNS))
    for t, (d, w, p) in enumerate(zip(scenario.demand, scenario.wind, scenario.pv), start=1):
        out.append(f"{t},{_fmt(d)},{_fmt(w)},{_fmt(p)}")
    return "\n".join(out) + "\n"


# case config -------------------------------------------------------------------

@dataclass(frozen=True)
class CaseConfig:
    """Case parameters read from a ``key = value`` file.

    Keys: alpha, distribution (normal|laplace|none), elasticity, rbar, and
    either levels (absolute prices) or level_multipliers (shares of rbar),
    horizon, ramp_fraction, node_limit, time_limit, fleet and scenario
    (paths relative to the config file). An ``[initial_state]`` section
    holds ``<unit id> = committed, output_mw, run_length`` lines and an
    optional ``default = ...`` line for units not listed.
    """

    alpha: float = 0.90
    distribution: Distribution = Distribution.NORMAL
    elasticity: float = 0.0
    rbar: float = 10.0
    levels: tuple[float, ...] | None = None
    level_multipliers: tuple[float, ...] = (0.7, 0.85, 1.0, 1.15, 1.3)
    horizon: int | None = None
    ramp_fraction: bool = False
    node_limit: int | None = None
    time_limit: float | None = None
    fleet: str | None = None
    scenario: str | None = None
    initial: dict = field(default_factory=dict)        # unit id -> UnitState
    initial_default: UnitState | None = None

    def chance(self) -> ChanceSpec:
        if self.distribution is Distribution.DETERMINISTIC:
            return ChanceSpec.deterministic()
        return ChanceSpec(self.alpha, self.distribution)

    def tariff(self) -> Tariff:
        if self.levels is not None:
            return validate_tariff(Tariff(self.rbar, self.levels, self.elasticity))
        return default_tariff(self.elasticity, self.rbar, self.level_multipliers)

    def initial_state(self, fleet: Fleet) -> InitialState:
        unknown = set(self.initial) - {u.id for u in fleet}
        if unknown:
            raise UcdrError(f"initial state names unknown unit ids {sorted(unknown)}")
        base = InitialState.all_off(fleet)
        states = []
        for k, unit in enumerate(fleet):
            st = self.initial.get(unit.id, self.initial_default)
            states.append(base[k] if st is None else st)
        return validate_initial_state(InitialState(tuple(states)), fleet)

    def check_horizon(self, scenario: Scenario) -> Scenario:
        if self.horizon is not None and scenario.T != self.horizon:
            raise UcdrError(f"config horizon {self.horizon} but scenario has {scenario.T} steps")
        return scenario

    def search_config(self, base: SearchConfig | None = None) -> SearchConfig:
        from dataclasses import replace
        cfg = base or SearchConfig()
        if self.node_limit is not None:
            cfg = replace(cfg, node_limit=self.node_limit)
        if self.time_limit is not None:
            cfg = replace(cfg, time_limit=self.time_limit)
        return cfg


def _bool(text, line, key):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ParseError(line, key, f"expected true or false, got {text!r}")


def _numbers(text, line, key):
    toks = [s for s in text.split(",")]
    if not toks or any(not s.strip() for s in toks):
        raise ParseError(line, key, "expected a comma-separated list of numbers")
    return tuple(_number(s, line, key) for s in toks)


def _unit_state(text, line, key):
    toks = text.split(",")
    if len(toks) != 3:
        raise ParseError(line, key, "expected 'committed, output_mw, run_length'")
    u0 = _number(toks[0], line, key, integer=True)
    if u0 not in (0, 1):
        raise ParseError(line, key, "committed flag must be 0 or 1")
    return UnitState(u0, _number(toks[1], line, key), _number(toks[2], line, key, integer=True))


def load_config(text: str) -> CaseConfig:
    vals = {}
    initial = {}
    default = None
    section = None
    seen = set()
    for k, line in _content_lines(text):
        if line.startswith("["):
            if line != "[initial_state]":
                raise ParseError(k, None, f"unknown section {line}")
            section = "initial_state"
            continue
        if "=" not in line:
            raise ParseError(k, None, "expected 'key = value'")
        key, _, val = (s.strip() for s in line.partition("="))
        if (section, key) in seen:
            raise ParseError(k, key, f"'{key}' given twice")
        seen.add((section, key))
        if section == "initial_state":
            if key == "default":
                default = _unit_state(val, k, key)
            else:
                initial[_number(key, k, key, integer=True)] = _unit_state(val, k, key)
            continue
        if key in ("alpha", "elasticity", "rbar", "time_limit"):
            vals[key] = _number(val, k, key)
        elif key in ("node_limit", "horizon"):
            vals[key] = _number(val, k, key, integer=True)
        elif key in ("levels", "level_multipliers"):
            vals[key] = _numbers(val, k, key)
        elif key == "ramp_fraction":
            vals[key] = _bool(val, k, key)
        elif key == "distribution":
            try:
                vals[key] = Distribution.parse(val)
            except ValueError:
                raise ParseError(k, key, f"unknown distribution {val!r}") from None
        elif key in ("fleet", "scenario"):
            vals[key] = val
        else:
            raise ParseError(k, key, f"unknown config key '{key}'")
    cfg = CaseConfig(initial=initial, initial_default=default, **vals)
    try:
        cfg.chance()
        cfg.tariff()
    except UcdrError as exc:
        raise ParseError(0, None, f"inconsistent case parameters: {exc}") from exc
    return cfg


def resolve(config_path, relative: str | None):
    """Path named inside a config file, taken relative to that file."""
    if relative is None:
        return None
    p = Path(relative)
    if not p.is_absolute() and config_path is not None:
        p = Path(config_path).parent / p
    return p


def load_fleet_file(path, ramp_fraction=False) -> Fleet:
    return load_fleet(read_text(path), ramp_fraction)


def load_scenario_file(path) -> Scenario:
    return load_scenario(read_text(path))


def load_config_file(path) -> CaseConfig:
    return load_config(read_text(path))


def csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()
