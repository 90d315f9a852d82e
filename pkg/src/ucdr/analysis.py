"""Post-processing of solved schedules: metrics, profit terms and an independent checker.

The validator in this module re-derives every model constraint from the
input data. It deliberately never looks at a ``MilpProblem``, so that a
bug in row assembly and a bug in checking cannot cancel out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .branch_bound import MilpSolution, SearchConfig, solve_uc
from .domain import (ChanceSpec, DimensionMismatch, Fleet, InitialState, Scenario, Tariff,
                     UcdrError)
from .formulation import build, fix_tariff
from .stochastics import reserve_offset

LFC_SHARE = 0.05        # share of a committed unit's capacity counted as LFC headroom
TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Schedule:
    """One operating plan: p, u, z as (T, N) arrays, w as (T, L)."""

    p: np.ndarray
    u: np.ndarray
    z: np.ndarray
    w: np.ndarray
    objective: float = float("nan")

    @property
    def T(self) -> int:
        return self.p.shape[0]

    @property
    def N(self) -> int:
        return self.p.shape[1]

    def committed_count(self) -> np.ndarray:
        return np.rint(self.u).sum(axis=1).astype(int)

    def level_index(self) -> np.ndarray:
        """0-based selected price level per step."""
        return np.argmax(self.w, axis=1)

    @classmethod
    def from_solution(cls, sol: MilpSolution) -> "Schedule":
        if sol.x is None:
            raise UcdrError("solution carries no incumbent schedule")
        p, u, z, w = sol.problem.layout.split(sol.x)
        return cls(p.copy(), np.rint(u), z.copy(), np.rint(w), float(sol.objective))


@dataclass(frozen=True)
class Violation:
    tag: str            # model equation the check comes from, e.g. "Eq12"
    indices: tuple      # 1-based (t,), (t, i), (t, i, s) or () for horizon-wide rows
    residual: float     # amount by which the constraint fails

    def __str__(self):
        where = ",".join(str(k) for k in self.indices)
        return f"{self.tag}[{where}] residual {self.residual:.6g}"


@dataclass(frozen=True)
class ProfitTerms:
    revenue: np.ndarray
    fuel: np.ndarray
    startup: np.ndarray

    @property
    def operation_cost(self) -> float:
        return float(self.fuel.sum() + self.startup.sum())

    @property
    def total(self) -> float:
        return float(self.revenue.sum()) - self.operation_cost


@dataclass(eq=False)
class ScheduleReport:
    marginal_cost: list            # cost/MWh, None where no unit runs
    spinning_reserve: np.ndarray | None   # MW; None when no deterministic re-solve was made
    lfc_margin: np.ndarray
    revenue: np.ndarray
    fuel_cost: np.ndarray
    startup_cost: np.ndarray
    realized_demand: np.ndarray
    selected_price: np.ndarray
    committed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))

    @property
    def T(self) -> int:
        return len(self.lfc_margin)

    @property
    def operation_cost(self) -> float:
        return float(self.fuel_cost.sum() + self.startup_cost.sum())

    @property
    def profit(self) -> float:
        return float(self.revenue.sum()) - self.operation_cost


# metrics -------------------------------------------------------------------

def marginal_cost(schedule: Schedule, fleet: Fleet) -> list:
    """Highest fuel cost among committed units per step, None when none run."""
    b = fleet.column("fuel_cost_b")
    out = []
    for row in np.rint(schedule.u):
        on = row > 0.5
        out.append(float(b[on].max()) if on.any() else None)
    return out


def spinning_reserve(stochastic: Schedule, deterministic: Schedule) -> np.ndarray:
    """Thermal output of the chance-constrained plan minus that of the deterministic one."""
    if stochastic.p.shape != deterministic.p.shape:
        raise DimensionMismatch(f"schedules have shapes {stochastic.p.shape} and "
                                f"{deterministic.p.shape}")
    return stochastic.p.sum(axis=1) - deterministic.p.sum(axis=1)


def lfc_margin(schedule: Schedule, fleet: Fleet) -> np.ndarray:
    p_max = fleet.column("p_max")
    on = np.rint(schedule.u) > 0.5
    head = np.minimum(p_max[None, :] - schedule.p, LFC_SHARE * p_max[None, :])
    return np.where(on, head, 0.0).sum(axis=1)


def realized_demand(schedule: Schedule, tariff: Tariff, scenario: Scenario) -> np.ndarray:
    d = np.asarray(scenario.demand)
    return d * (schedule.w @ tariff.demand_factors())


def profit_breakdown(schedule: Schedule, tariff: Tariff, scenario: Scenario,
                     fleet: Fleet) -> ProfitTerms:
    """Per-step revenue, fuel and startup cost."""
    r = np.asarray(tariff.levels)
    revenue = np.asarray(scenario.demand) * (schedule.w @ (r * tariff.demand_factors()))
    fuel = schedule.p @ fleet.column("fuel_cost_b")
    startup = schedule.z @ fleet.column("startup_cost_S")
    return ProfitTerms(revenue, fuel, startup)


def make_report(schedule: Schedule, fleet: Fleet, scenario: Scenario, tariff: Tariff,
                reserve: np.ndarray | None = None) -> ScheduleReport:
    terms = profit_breakdown(schedule, tariff, scenario, fleet)
    return ScheduleReport(
        marginal_cost=marginal_cost(schedule, fleet),
        spinning_reserve=None if reserve is None else np.asarray(reserve, dtype=float),
        lfc_margin=lfc_margin(schedule, fleet),
        revenue=terms.revenue,
        fuel_cost=terms.fuel,
        startup_cost=terms.startup,
        realized_demand=realized_demand(schedule, tariff, scenario),
        selected_price=np.asarray(tariff.levels)[schedule.level_index()],
        committed=schedule.committed_count(),
    )


# validator -------------------------------------------------------------------

def validate_schedule(schedule: Schedule, fleet: Fleet, scenario: Scenario, tariff: Tariff,
                      chance: ChanceSpec, init: InitialState | None = None,
                      tol: float = TOL) -> list[Violation]:
    """Every constraint the schedule breaks by more than `tol`; empty means feasible."""
    T, N = scenario.T, len(fleet)
    p, u, z, w = (np.asarray(a, dtype=float) for a in
                  (schedule.p, schedule.u, schedule.z, schedule.w))
    if p.shape != (T, N) or u.shape != (T, N) or z.shape != (T, N) or w.shape != (T, tariff.L):
        raise DimensionMismatch("schedule arrays do not match fleet, horizon and tariff")
    init = init if init is not None else InitialState.all_off(fleet)
    out: list[Violation] = []

    def report(tag, idx, amount):
        if amount > tol:
            out.append(Violation(tag, tuple(int(k) for k in idx), float(amount)))

    # variable domains
    for (t, i), v in np.ndenumerate(u):
        report("binary_u", (t + 1, i + 1), abs(v - round(v)))
    for (t, l), v in np.ndenumerate(w):
        report("binary_w", (t + 1, l + 1), abs(v - round(v)))
    for (t, i), v in np.ndenumerate(z):
        report("bounds_z", (t + 1, i + 1), max(-v, v - 1.0))
    for (t, i), v in np.ndenumerate(p):
        report("bounds_p", (t + 1, i + 1), -v)

    levels = np.asarray(tariff.levels)
    factor = (levels / tariff.mean_price_rbar) ** tariff.elasticity_eps
    demand = np.asarray(scenario.demand)
    realized = demand * (w @ factor)
    # one price level per step
    for t in range(T):
        report("Eq3", (t + 1,), abs(w[t].sum() - 1.0))
    # supply covers realized demand plus the reserve term
    need = realized + reserve_offset(chance, scenario.sigmas)
    supply = p.sum(axis=1) + np.asarray(scenario.wind) + np.asarray(scenario.pv)
    bal = "Eq6" if chance.is_deterministic else "Eq7"
    for t in range(T):
        report(bal, (t + 1,), need[t] - supply[t])
    # horizon-average price at most rbar, horizon demand at least the forecast
    report("Eq4", (), float(np.mean(w @ levels)) - tariff.mean_price_rbar)
    report("Eq5", (), float(demand.sum() - realized.sum()))

    for i, unit in enumerate(fleet):
        st = init[i]
        uc = np.concatenate([[st.committed_u0], u[:, i]])    # uc[k] is u at step k, k=0 initial
        pc = np.concatenate([[st.output_p0], p[:, i]])
        for k in range(1, T + 1):
            idx = (k, i + 1)
            on, prev_on = uc[k], uc[k - 1]
            report("Eq12", idx, pc[k] - on * unit.p_max)
            report("Eq12", idx, on * unit.p_min - pc[k])
            step = pc[k] - pc[k - 1]
            report("Eq13", idx, step - (prev_on * unit.ramp_up + (1 - prev_on) * unit.p_min))
            report("Eq14", idx, -(on * unit.ramp_down + (1 - on) * unit.p_max) - step)
            report("Eq17", idx, (on - prev_on) - z[k - 1, i])
        # a start at step s keeps the unit on through s + min_up, a stop keeps it off
        for s in range(1, T + 1):
            started = uc[s] - uc[s - 1]
            for k in range(s + 1, min(T, s + unit.min_up) + 1):
                report("Eq15", (k, i + 1, s), started - uc[k])
            for k in range(s + 1, min(T, s + unit.min_down) + 1):
                report("Eq16", (k, i + 1, s), uc[k] - started - 1.0)
        # a state change shortly before the horizon still binds the first steps
        tau = unit.min_up if st.committed_u0 == 1 else unit.min_down
        tag = "Eq15" if st.committed_u0 == 1 else "Eq16"
        for k in range(1, min(T, tau - st.run_length) + 1):
            report(tag, (k, i + 1, 0), abs(uc[k] - st.committed_u0))
    return out


# orchestration -----------------------------------------------------------------

@dataclass(eq=False)
class ReserveStudy:
    stochastic: MilpSolution
    deterministic: MilpSolution
    reserve: np.ndarray           # MW per step
    offset: float                 # MW added to every balance row of the stochastic case


def reserve_study(fleet: Fleet, scenario: Scenario, tariff: Tariff, chance: ChanceSpec,
                  init: InitialState | None = None, config: SearchConfig | None = None,
                  stochastic: MilpSolution | None = None) -> ReserveStudy:
    """Chance-constrained solve, then the deterministic re-solve under the same tariff.

    The second solve re-optimizes commitment and dispatch freely; only the
    price-level selection is pinned to the first solution's choice.
    """
    if stochastic is None:
        stochastic = solve_uc(fleet, scenario, tariff, chance, init, config)
    if stochastic.x is None:
        raise UcdrError(f"stochastic solve ended {stochastic.status.value} without a schedule")
    sched = Schedule.from_solution(stochastic)
    det = fix_tariff(build(fleet, scenario, tariff, ChanceSpec.deterministic(), init), sched.w)
    # the stochastic schedule is feasible here (same tariff, smaller balance rhs), so it
    # seeds the search; with a zero offset it is already optimal and is kept as is
    det_sol = solve_uc(fleet, scenario, tariff, ChanceSpec.deterministic(), init, config,
                       problem=det, starts=[stochastic.x])
    if det_sol.x is None:
        raise UcdrError(f"deterministic solve ended {det_sol.status.value} without a schedule")
    series = spinning_reserve(sched, Schedule.from_solution(det_sol))
    return ReserveStudy(stochastic, det_sol, series, reserve_offset(chance, scenario.sigmas))


@dataclass(eq=False)
class Comparison:
    labels: list[str]
    committed: dict          # label -> per-step committed-unit counts
    operation_cost: dict     # label -> horizon fuel + startup cost
    profit: dict
    peak_demand: dict        # label -> max realized demand
    demand_spread: dict      # label -> max - min realized demand
    base: str

    def delta(self, label, metric="committed"):
        """Value of `label` minus the base case for one metric."""
        table = getattr(self, metric)
        return table[label] - table[self.base]

    def rows(self):
        """Per-step table rows: (t, count for each label, delta vs base for each other label)."""
        T = len(self.committed[self.base])
        others = [lb for lb in self.labels if lb != self.base]
        for t in range(T):
            yield ((t + 1,) + tuple(int(self.committed[lb][t]) for lb in self.labels)
                   + tuple(int(self.committed[lb][t] - self.committed[self.base][t])
                           for lb in others))


def compare_cases(cases, base: str | None = None) -> Comparison:
    """Side-by-side summary of labelled reports; deltas are taken against `base`."""
    cases = list(cases)
    if not cases:
        raise ValueError("nothing to compare")
    lengths = {rep.T for _, rep in cases}
    if len(lengths) != 1:
        raise DimensionMismatch(f"reports have different horizons {sorted(lengths)}")
    labels = [lb for lb, _ in cases]
    if len(set(labels)) != len(labels):
        raise ValueError("case labels must be unique")
    reps = dict(cases)
    return Comparison(
        labels=labels,
        committed={lb: np.asarray(r.committed, dtype=int) for lb, r in reps.items()},
        operation_cost={lb: r.operation_cost for lb, r in reps.items()},
        profit={lb: r.profit for lb, r in reps.items()},
        peak_demand={lb: float(np.max(r.realized_demand)) for lb, r in reps.items()},
        demand_spread={lb: float(np.ptp(r.realized_demand)) for lb, r in reps.items()},
        base=labels[0] if base is None else base,
    )
