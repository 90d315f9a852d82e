"""Sparse MILP form of the profit-maximizing unit commitment model.

Variable layout (0-based t, i, l)::

    p[t, i] = t*N + i                   output, MW, continuous
    u[t, i] = N*T + t*N + i             commitment, binary
    z[t, i] = 2*N*T + t*N + i           startup, continuous in [0, 1]
    w[t, l] = 3*N*T + t*L + l           price-level selection, binary

The objective is stored as a minimization of negated profit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .domain import (ChanceSpec, DimensionMismatch, Fleet, InitialState, Scenario,
                     Tariff, UcdrError, validate_initial_state)
from .stochastics import reserve_offset

LE, GE, EQ = "L", "G", "E"


class DimensionZero(UcdrError):
    pass


class InvalidSchedule(UcdrError):
    pass


@dataclass(frozen=True)
class VarLayout:
    N: int
    T: int
    L: int

    @property
    def total_vars(self) -> int:
        return 3 * self.N * self.T + self.L * self.T

    @property
    def n_binaries(self) -> int:
        return self.N * self.T + self.L * self.T

    def p(self, t, i):
        return t * self.N + i

    def u(self, t, i):
        return self.N * self.T + t * self.N + i

    def z(self, t, i):
        return 2 * self.N * self.T + t * self.N + i

    def w(self, t, l):
        return 3 * self.N * self.T + t * self.L + l

    @property
    def p_range(self) -> range:
        return range(0, self.N * self.T)

    @property
    def u_range(self) -> range:
        return range(self.N * self.T, 2 * self.N * self.T)

    @property
    def z_range(self) -> range:
        return range(2 * self.N * self.T, 3 * self.N * self.T)

    @property
    def w_range(self) -> range:
        return range(3 * self.N * self.T, self.total_vars)

    def split(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Reshape a flat vector into (p, u, z) as (T, N) and w as (T, L)."""
        x = np.asarray(x, dtype=float)
        NT = self.N * self.T
        p = x[:NT].reshape(self.T, self.N)
        u = x[NT:2 * NT].reshape(self.T, self.N)
        z = x[2 * NT:3 * NT].reshape(self.T, self.N)
        w = x[3 * NT:].reshape(self.T, self.L)
        return p, u, z, w

    def join(self, p, u, z, w) -> np.ndarray:
        return np.concatenate([np.ravel(p), np.ravel(u), np.ravel(z), np.ravel(w)]).astype(float)

    def column_names(self) -> list[str]:
        names = []
        for kind in "PUZ":
            names += [f"{kind}_{t + 1}_{i + 1}" for t in range(self.T) for i in range(self.N)]
        names += [f"W_{t + 1}_{l + 1}" for t in range(self.T) for l in range(self.L)]
        return names


def layout(N: int, T: int, L: int) -> VarLayout:
    if min(N, T, L) < 1:
        raise DimensionZero(f"dimensions must be positive, got N={N}, T={T}, L={L}")
    return VarLayout(int(N), int(T), int(L))


def _frozen(a) -> np.ndarray:
    a = np.array(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class MilpProblem:
    """Minimize ``cost @ x + constant`` subject to sparse rows and bounds.

    ``profit(x)`` is the negated objective. ``tags`` names the source
    equation of every row; ``balance_rows`` indexes the supply-demand
    rows (one per step) and ``offset`` their reserve term in MW.
    """

    cost: np.ndarray
    constant: float
    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    integrality: np.ndarray
    layout: VarLayout | None
    tags: tuple[str, ...]
    names: tuple[str, ...] = ()
    balance_rows: tuple[int, ...] = ()
    offset: np.ndarray | None = None
    maximize: bool = True

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_cols(self) -> int:
        return self.A.shape[1]

    def objective(self, x) -> float:
        return float(self.cost @ np.asarray(x, dtype=float) + self.constant)

    def profit(self, x) -> float:
        return -self.objective(x)

    def row_activity(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float)

    def with_bounds(self, lo, hi) -> "MilpProblem":
        return replace(self, lo=_frozen(np.asarray(lo, dtype=float)),
                       hi=_frozen(np.asarray(hi, dtype=float)))

    def row_violations(self, x, tol=1e-6) -> list[tuple[int, float]]:
        """(row, residual) for every row violated by more than `tol`."""
        act = self.row_activity(x)
        res = np.zeros_like(act)
        le, ge, eq = self.sense == LE, self.sense == GE, self.sense == EQ
        res[le] = np.maximum(act[le] - self.rhs[le], 0.0)
        res[ge] = np.maximum(self.rhs[ge] - act[ge], 0.0)
        res[eq] = np.abs(act[eq] - self.rhs[eq])
        return [(int(k), float(res[k])) for k in np.flatnonzero(res > tol)]


class _Rows:
    def __init__(self):
        self.ri, self.ci, self.vals = [], [], []
        self.sense, self.rhs, self.tags, self.names = [], [], [], []

    def add(self, terms: Iterable[tuple[int, float]], sense, rhs, tag, name) -> int:
        k = len(self.rhs)
        for col, val in terms:
            if val != 0.0:
                self.ri.append(k)
                self.ci.append(col)
                self.vals.append(float(val))
        self.sense.append(sense)
        self.rhs.append(float(rhs))
        self.tags.append(tag)
        self.names.append(name)
        return k

    def matrix(self, n_cols) -> sp.csr_matrix:
        A = sp.coo_matrix((self.vals, (self.ri, self.ci)), shape=(len(self.rhs), n_cols))
        return A.tocsr()


def build(fleet: Fleet, scenario: Scenario, tariff: Tariff, chance: ChanceSpec,
          init: InitialState | None = None) -> MilpProblem:
    """Assemble the MILP for one case.

    Rows per step: price-level choice (Eq3) and supply-demand balance
    (Eq7, or Eq6 when deterministic). Global rows: mean price (Eq4) and
    demand conservation (Eq5). Per unit and step: capacity (Eq12, two
    rows), ramp up (Eq13), ramp down (Eq14), startup (Eq17). Per unit,
    step and window position s >= 1: min-up (Eq15) and min-down (Eq16).
    Window terms before the horizon become bounds on u.
    """
    N, T, L = len(fleet), scenario.T, tariff.L
    lay = layout(N, T, L)
    for name in ("demand", "wind", "pv"):
        if len(getattr(scenario, name)) != T:
            raise DimensionMismatch(f"series '{name}' does not match horizon {T}")
    if init is None:
        init = InitialState.all_off(fleet)
    validate_initial_state(init, fleet)

    d = np.asarray(scenario.demand)
    wd = np.asarray(scenario.wind)
    pv = np.asarray(scenario.pv)
    r = np.asarray(tariff.levels)
    m = tariff.demand_factors()
    off = reserve_offset(chance, scenario.sigmas)
    bal_tag = "Eq6" if chance.is_deterministic else "Eq7"

    n = lay.total_vars
    profit = np.zeros(n)
    lo = np.zeros(n)
    hi = np.ones(n)
    integ = np.zeros(n, dtype=bool)
    for t in range(T):
        for i, unit in enumerate(fleet):
            profit[lay.p(t, i)] = -unit.fuel_cost_b
            profit[lay.z(t, i)] = -unit.startup_cost_S
            hi[lay.p(t, i)] = unit.p_max
            integ[lay.u(t, i)] = True
        for l in range(L):
            profit[lay.w(t, l)] = d[t] * r[l] * m[l]
            integ[lay.w(t, l)] = True

    rows = _Rows()
    balance_rows = []
    for t in range(T):
        rows.add(((lay.w(t, l), 1.0) for l in range(L)), EQ, 1.0, "Eq3", f"PL_{t + 1}")
    for t in range(T):
        terms = [(lay.p(t, i), 1.0) for i in range(N)]
        terms += [(lay.w(t, l), -d[t] * m[l]) for l in range(L)]
        balance_rows.append(rows.add(terms, GE, off - wd[t] - pv[t], bal_tag, f"BAL_{t + 1}"))
    rows.add(((lay.w(t, l), r[l] / T) for t in range(T) for l in range(L)),
             LE, tariff.mean_price_rbar, "Eq4", "MEANP")
    rows.add(((lay.w(t, l), -d[t] * m[l]) for t in range(T) for l in range(L)),
             LE, -float(d.sum()), "Eq5", "DCONS")

    for i, unit in enumerate(fleet):
        st = init[i]
        u0, p0 = st.committed_u0, st.output_p0
        for t in range(T):
            p, u, z = lay.p(t, i), lay.u(t, i), lay.z(t, i)
            tag = f"{t + 1}_{i + 1}"
            rows.add(((p, 1.0), (u, -unit.p_max)), LE, 0.0, "Eq12", f"CMAX_{tag}")
            rows.add(((p, 1.0), (u, -unit.p_min)), GE, 0.0, "Eq12", f"CMIN_{tag}")
            # p_t - p_{t-1} <= u_{t-1} dU + (1 - u_{t-1}) p_min
            if t == 0:
                rows.add(((p, 1.0),), LE,
                         p0 + u0 * unit.ramp_up + (1 - u0) * unit.p_min, "Eq13", f"RUP_{tag}")
            else:
                u_prev = lay.u(t - 1, i)
                rows.add(((p, 1.0), (lay.p(t - 1, i), -1.0),
                          (u_prev, unit.p_min - unit.ramp_up)),
                         LE, unit.p_min, "Eq13", f"RUP_{tag}")
            # p_t - p_{t-1} >= -u_t dD - (1 - u_t) p_max
            if t == 0:
                rows.add(((p, 1.0), (u, unit.ramp_down - unit.p_max)), GE,
                         p0 - unit.p_max, "Eq14", f"RDN_{tag}")
            else:
                rows.add(((p, 1.0), (lay.p(t - 1, i), -1.0),
                          (u, unit.ramp_down - unit.p_max)),
                         GE, -unit.p_max, "Eq14", f"RDN_{tag}")
            if t == 0:
                rows.add(((z, 1.0), (u, -1.0)), GE, -u0, "Eq17", f"START_{tag}")
            else:
                rows.add(((z, 1.0), (u, -1.0), (lay.u(t - 1, i), 1.0)),
                         GE, 0.0, "Eq17", f"START_{tag}")
        _window_rows(rows, lay, i, unit.min_up, u0, GE, "Eq15", "MUP", T)
        _window_rows(rows, lay, i, unit.min_down, u0, LE, "Eq16", "MDN", T)
        # pre-horizon state change still inside a window
        for t in range(T):
            remaining = t + 1 <= _need(unit, st)
            if remaining:
                if u0 == 1:
                    lo[lay.u(t, i)] = 1.0
                else:
                    hi[lay.u(t, i)] = 0.0

    A = rows.matrix(n)
    return MilpProblem(
        cost=_frozen(-profit), constant=0.0, A=A,
        sense=_frozen(rows.sense), rhs=_frozen(rows.rhs),
        lo=_frozen(lo), hi=_frozen(hi), integrality=_frozen(integ),
        layout=lay, tags=tuple(rows.tags), names=tuple(rows.names),
        balance_rows=tuple(balance_rows), offset=_frozen(np.full(T, off)),
    )


def _need(unit, st) -> int:
    """Steps at the start of the horizon locked by the initial state."""
    tau = unit.min_up if st.committed_u0 == 1 else unit.min_down
    return max(0, tau - st.run_length)


def _window_rows(rows, lay, i, tau, u0, sense, tag, prefix, T):
    """u_t - u_s + u_{s-1} >= 0 (min up) or <= 1 (min down), s in [t-tau, t-1]."""
    for t in range(T):
        for s in range(t - tau, t):   # 0-based s; 1-based index s+1
            if s < 0:
                continue
            name = f"{prefix}_{t + 1}_{i + 1}_{s + 1}"
            base = 0.0 if sense == GE else 1.0
            terms = [(lay.u(t, i), 1.0), (lay.u(s, i), -1.0)]
            if s == 0:
                rhs = base - u0
            else:
                terms.append((lay.u(s - 1, i), 1.0))
                rhs = base
            rows.add(terms, sense, rhs, tag, name)


def deterministic_variant(fleet, scenario, tariff, init=None) -> MilpProblem:
    return build(fleet, scenario, tariff, ChanceSpec.deterministic(), init)


def fix_tariff(problem: MilpProblem, w_star) -> MilpProblem:
    """Copy of `problem` with every w variable clamped to `w_star` (T x L)."""
    lay = problem.layout
    w_star = np.rint(np.asarray(w_star, dtype=float).reshape(lay.T, lay.L))
    bad = np.flatnonzero(w_star.sum(axis=1) != 1)
    if bad.size or np.any((w_star != 0) & (w_star != 1)):
        raise InvalidSchedule(f"price selection must pick exactly one level per step "
                              f"(violations at steps {[int(t) + 1 for t in bad]})")
    lo = np.array(problem.lo)
    hi = np.array(problem.hi)
    idx = np.array(lay.w_range)
    lo[idx] = w_star.ravel()
    hi[idx] = w_star.ravel()
    return problem.with_bounds(lo, hi)
