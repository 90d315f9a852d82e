"""Bounded-variable primal simplex for LP relaxations.

Every row ``a_k x (<=, >=, =) b_k`` gets a logical variable ``r_k = a_k x``
whose bounds carry the row sense, so the working system is
``[A  -I] (x, r) = 0`` with all variables boxed (bounds may be
infinite). The starting basis is the logical one; phase one minimizes
the sum of bound infeasibilities of the basic variables, phase two the
true objective. The basis inverse is kept dense and updated in product
form, with periodic refactorization.

:class:`HighsEngine` offers the same solve contract on top of HiGHS's
dual simplex for the full-size relaxations where a dense inverse is
too slow.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .domain import UcdrError

AT_LO, AT_HI, FREE, BASIC = 0, 1, 2, 3


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


class NumericalFailure(UcdrError):
    pass


class IterationLimit(UcdrError):
    pass


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """Minimize ``c @ x + constant`` subject to sparse rows and bounds."""

    c: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    constant: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "A", sp.csr_matrix(self.A, dtype=float))
        object.__setattr__(self, "sense", np.asarray(self.sense, dtype="<U1"))
        object.__setattr__(self, "rhs", np.asarray(self.rhs, dtype=float))
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        m, n = self.A.shape
        if self.c.shape != (n,) or self.lo.shape != (n,) or self.hi.shape != (n,):
            raise ValueError("objective and bounds must match the column count")
        if self.sense.shape != (m,) or self.rhs.shape != (m,):
            raise ValueError("row senses and right-hand sides must match the row count")
        if np.any(self.lo > self.hi):
            raise ValueError("every variable needs lo <= hi")

    @property
    def shape(self):
        return self.A.shape

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.where(self.sense == "L", -np.inf, self.rhs)
        hi = np.where(self.sense == "G", np.inf, self.rhs)
        return lo, hi

    def with_col_bounds(self, lo, hi) -> "LinearProgram":
        return replace(self, lo=np.asarray(lo, dtype=float), hi=np.asarray(hi, dtype=float))

    @classmethod
    def from_milp(cls, problem) -> "LinearProgram":
        return cls(problem.cost, problem.A, problem.sense, problem.rhs,
                   problem.lo, problem.hi, problem.constant)


@dataclass(frozen=True)
class SimplexConfig:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    pivot_tol: float = 1e-9
    degenerate_streak: int = 50
    max_iter: int | None = None      # default 50 * (rows + cols)
    refactor_every: int = 100
    record_pivots: bool = False


@dataclass(frozen=True, eq=False)
class Basis:
    """Basic column per row plus a status code per column (x then r)."""

    head: np.ndarray
    status: np.ndarray
    kind: str = "internal"
    native: object = None


@dataclass(eq=False)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None
    objective: float
    basis: Basis | None = None
    iterations: int = 0
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    pivots: tuple = ()

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def solve_lp(lp: LinearProgram, config: SimplexConfig | None = None,
             basis: Basis | None = None) -> LpSolution:
    """Solve `lp`, optionally starting from `basis` of a same-shaped LP."""
    config = config or SimplexConfig()
    return _Simplex(lp, config).run(basis)


def resolve_with_bound(lp: LinearProgram, basis: Basis, var_index: int, new_bounds,
                       config: SimplexConfig | None = None) -> LpSolution:
    """Re-solve after changing one column's bounds, warm from `basis`."""
    lo = np.array(lp.lo)
    hi = np.array(lp.hi)
    lo[var_index], hi[var_index] = new_bounds
    return solve_lp(lp.with_col_bounds(lo, hi), config, basis)


class _Simplex:
    def __init__(self, lp: LinearProgram, config: SimplexConfig):
        self.lp = lp
        self.cfg = config
        m, n = lp.A.shape
        self.m, self.n = m, n
        self.A = lp.A.toarray()
        rlo, rhi = lp.row_bounds()
        self.lo = np.concatenate([lp.lo, rlo])
        self.hi = np.concatenate([lp.hi, rhi])
        self.cost = np.concatenate([lp.c, np.zeros(m)])
        self.max_iter = config.max_iter if config.max_iter is not None else 50 * (m + n)

    def column(self, j):
        if j < self.n:
            return self.A[:, j]
        e = np.zeros(self.m)
        e[j - self.n] = -1.0
        return e

    def _nonbasic_value(self, j, st):
        lo, hi = self.lo[j], self.hi[j]
        if st == AT_LO and np.isfinite(lo):
            return lo, AT_LO
        if st == AT_HI and np.isfinite(hi):
            return hi, AT_HI
        if np.isfinite(lo):
            return lo, AT_LO
        if np.isfinite(hi):
            return hi, AT_HI
        return 0.0, FREE

    def _start(self, basis):
        m, n = self.m, self.n
        self.status = np.full(n + m, AT_LO, dtype=np.int8)
        self.v = np.zeros(n + m)
        if basis is not None and basis.kind == "internal" and len(basis.head) == m \
                and len(basis.status) == n + m:
            self.head = np.array(basis.head, dtype=np.int64)
            status = np.array(basis.status, dtype=np.int8)
        else:
            self.head = np.arange(n, n + m, dtype=np.int64)
            status = np.full(n + m, AT_LO, dtype=np.int8)
            status[n:] = BASIC
        for j in range(n + m):
            if status[j] == BASIC:
                self.status[j] = BASIC
            else:
                self.v[j], self.status[j] = self._nonbasic_value(j, status[j])
        if not self._refactor():
            # singular warm basis: fall back to the logical basis
            self.head = np.arange(n, n + m, dtype=np.int64)
            self.status[:] = AT_LO
            self.status[n:] = BASIC
            for j in range(n):
                self.v[j], self.status[j] = self._nonbasic_value(j, AT_LO)
            if not self._refactor():
                raise NumericalFailure("logical basis is singular")

    def _refactor(self) -> bool:
        B = np.column_stack([self.column(j) for j in self.head]) if self.m else np.zeros((0, 0))
        try:
            self.Binv = np.linalg.inv(B) if self.m else B
        except np.linalg.LinAlgError:
            return False
        if self.m and not np.all(np.isfinite(self.Binv)):
            return False
        self._recompute_basics()
        return True

    def _recompute_basics(self):
        nb = self.status != BASIC
        x_nb = np.where(nb, self.v, 0.0)
        # [A -I] v = 0  =>  B v_B = -N v_N
        rhs = -(self.A @ x_nb[:self.n] - x_nb[self.n:])
        self.v[self.head] = self.Binv @ rhs

    def run(self, basis) -> LpSolution:
        cfg = self.cfg
        m, n = self.m, self.n
        self._start(basis)
        tol = cfg.feas_tol
        it = 0
        streak = 0
        bland = False
        pivots = []
        since_refactor = 0
        while True:
            xB = self.v[self.head]
            loB, hiB = self.lo[self.head], self.hi[self.head]
            below = xB < loB - tol
            above = xB > hiB + tol
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                cN_x = np.zeros(n)
            else:
                cB = self.cost[self.head]
                cN_x = self.lp.c
            y = cB @ self.Binv if m else np.zeros(0)
            d = np.empty(n + m)
            d[:n] = cN_x - self.A.T @ y
            d[n:] = y
            d[self.head] = 0.0
            q, direction = self._price(d, bland)
            if q < 0:
                if phase1:
                    return self._finish(LpStatus.INFEASIBLE, it, None, pivots)
                return self._finish(LpStatus.OPTIMAL, it, (y, d), pivots)
            if it >= self.max_iter:
                return self._finish(LpStatus.ITERATION_LIMIT, it, None, pivots)
            alpha = self.Binv @ self.column(q)
            theta, p, to_upper = self._ratio(alpha, direction, phase1, below, above, bland, q)
            if not math.isfinite(theta):
                if phase1:
                    raise NumericalFailure("unbounded step during phase one")
                return self._finish(LpStatus.UNBOUNDED, it, None, pivots)
            it += 1
            streak = streak + 1 if theta <= 1e-12 else 0
            if bland and theta > 1e-12:
                bland = False
            elif streak >= cfg.degenerate_streak:
                bland = True
            self.v[self.head] -= theta * direction * alpha
            self.v[q] += theta * direction
            if p < 0:
                # entering variable flips to its opposite bound
                self.status[q] = AT_HI if direction > 0 else AT_LO
                self.v[q] = self.hi[q] if direction > 0 else self.lo[q]
                if cfg.record_pivots:
                    pivots.append((int(q), -1))
                continue
            leave = int(self.head[p])
            if cfg.record_pivots:
                pivots.append((int(q), leave))
            self.status[leave] = AT_HI if to_upper else AT_LO
            self.v[leave] = self.hi[leave] if to_upper else self.lo[leave]
            self.head[p] = q
            self.status[q] = BASIC
            piv = alpha[p]
            row = self.Binv[p] / piv
            self.Binv -= np.outer(alpha, row)
            self.Binv[p] = row
            since_refactor += 1
            if since_refactor >= cfg.refactor_every:
                since_refactor = 0
                if not self._refactor():
                    raise NumericalFailure("basis became singular")

    def _price(self, d, bland):
        tol = self.cfg.opt_tol
        st = self.status
        movable = self.hi > self.lo
        up = ((st == AT_LO) | (st == FREE)) & (d < -tol) & movable
        down = ((st == AT_HI) | (st == FREE)) & (d > tol) & movable
        cand = np.flatnonzero(up | down)
        if cand.size == 0:
            return -1, 0
        if bland:
            q = int(cand[0])
        else:
            q = int(cand[np.argmax(np.abs(d[cand]))])
        return q, (1.0 if up[q] else -1.0)

    def _ratio(self, alpha, direction, phase1, below, above, bland, q):
        """Bounded ratio test; returns (step, leaving row or -1, leaves at upper)."""
        ptol = self.cfg.pivot_tol
        tol = self.cfg.feas_tol
        head = self.head
        xB = self.v[head]
        loB, hiB = self.lo[head], self.hi[head]
        rate = -direction * alpha           # d xB / d theta
        theta_q = self.hi[q] - self.lo[q]   # bound flip of the entering column
        limits = np.full(len(head), np.inf)
        to_upper = np.zeros(len(head), dtype=bool)
        dec = rate < -ptol
        inc = rate > ptol
        if phase1:
            feas = ~(below | above)
            # decreasing: feasible rows stop at lo, rows above hi stop at hi
            m1 = dec & feas & np.isfinite(loB)
            limits[m1] = (xB[m1] - loB[m1]) / -rate[m1]
            m2 = dec & above
            limits[m2] = (xB[m2] - hiB[m2]) / -rate[m2]
            to_upper[m2] = True
            m3 = inc & feas & np.isfinite(hiB)
            limits[m3] = (hiB[m3] - xB[m3]) / rate[m3]
            to_upper[m3] = True
            m4 = inc & below
            limits[m4] = (loB[m4] - xB[m4]) / rate[m4]
        else:
            m1 = dec & np.isfinite(loB)
            limits[m1] = (xB[m1] - loB[m1]) / -rate[m1]
            m3 = inc & np.isfinite(hiB)
            limits[m3] = (hiB[m3] - xB[m3]) / rate[m3]
            to_upper[m3] = True
        limits = np.maximum(limits, 0.0)
        best = limits.min() if len(limits) else np.inf
        if not math.isfinite(best) and not math.isfinite(theta_q):
            return np.inf, -1, False
        if theta_q <= best:
            return theta_q, -1, False
        # among near-ties prefer the largest pivot, or the lowest column in Bland mode
        ties = np.flatnonzero(limits <= best + tol * 1e-2)
        if bland:
            p = int(ties[np.argmin(head[ties])])
        else:
            p = int(ties[np.argmax(np.abs(alpha[ties]))])
        return float(limits[p]), p, bool(to_upper[p])

    def _finish(self, status, it, duals, pivots) -> LpSolution:
        n = self.n
        basis = Basis(self.head.copy(), self.status.copy())
        if status is not LpStatus.OPTIMAL:
            return LpSolution(status, None, math.nan, basis, it, pivots=tuple(pivots))
        self._refactor()
        x = self.v[:n].copy()
        obj = float(self.lp.c @ x + self.lp.constant)
        y = self.cost[self.head] @ self.Binv if self.m else np.zeros(0)
        dx = self.lp.c - self.A.T @ y
        return LpSolution(status, x, obj, basis, it, duals=y, reduced_costs=dx,
                          pivots=tuple(pivots))


class InternalEngine:
    """Re-solves one LP shape under changing column bounds (dense inverse)."""

    name = "internal"

    def __init__(self, lp: LinearProgram, config: SimplexConfig | None = None):
        self.lp = lp
        self.config = config or SimplexConfig()

    def solve(self, lo, hi, basis: Basis | None = None) -> LpSolution:
        return solve_lp(self.lp.with_col_bounds(lo, hi), self.config, basis)


class HighsEngine:
    """Same contract as :class:`InternalEngine`, backed by HiGHS dual simplex."""

    name = "highs"

    def __init__(self, lp: LinearProgram, config: SimplexConfig | None = None):
        import highspy

        self._hs = highspy
        self.lp = lp
        self.config = config or SimplexConfig()
        h = highspy.Highs()
        h.silent()
        h.setOptionValue("presolve", "off")
        h.setOptionValue("primal_feasibility_tolerance", self.config.feas_tol)
        h.setOptionValue("dual_feasibility_tolerance", self.config.opt_tol)
        h.setOptionValue("random_seed", 0)
        h.setOptionValue("threads", 1)
        inf = highspy.kHighsInf
        model = highspy.HighsLp()
        m, n = lp.A.shape
        model.num_col_ = n
        model.num_row_ = m
        model.col_cost_ = lp.c
        model.offset_ = lp.constant
        model.col_lower_ = np.where(np.isfinite(lp.lo), lp.lo, -inf)
        model.col_upper_ = np.where(np.isfinite(lp.hi), lp.hi, inf)
        rlo, rhi = lp.row_bounds()
        model.row_lower_ = np.where(np.isfinite(rlo), rlo, -inf)
        model.row_upper_ = np.where(np.isfinite(rhi), rhi, inf)
        csc = lp.A.tocsc()
        csc.sort_indices()
        model.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        model.a_matrix_.start_ = csc.indptr
        model.a_matrix_.index_ = csc.indices
        model.a_matrix_.value_ = csc.data
        h.passModel(model)
        self.h = h
        self._lo = np.array(lp.lo)
        self._hi = np.array(lp.hi)
        self._idx = np.arange(n, dtype=np.int32)

    def solve(self, lo, hi, basis: Basis | None = None) -> LpSolution:
        hs, h = self._hs, self.h
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        changed = np.flatnonzero((lo != self._lo) | (hi != self._hi)).astype(np.int32)
        if changed.size:
            inf = hs.kHighsInf
            clo = np.where(np.isfinite(lo[changed]), lo[changed], -inf)
            chi = np.where(np.isfinite(hi[changed]), hi[changed], inf)
            h.changeColsBounds(changed.size, changed, clo, chi)
            self._lo[changed] = lo[changed]
            self._hi[changed] = hi[changed]
        if basis is not None and basis.kind == "highs" and basis.native is not None:
            h.setBasis(basis.native)
        h.run()
        ms = h.getModelStatus()
        info = h.getInfo()
        it = int(info.simplex_iteration_count)
        if ms == hs.HighsModelStatus.kOptimal:
            sol = h.getSolution()
            x = np.array(sol.col_value)
            native = h.getBasis()
            return LpSolution(LpStatus.OPTIMAL, x, float(self.lp.c @ x + self.lp.constant),
                              Basis(np.zeros(0), np.zeros(0), "highs", native), it,
                              duals=np.array(sol.row_dual), reduced_costs=np.array(sol.col_dual))
        if ms == hs.HighsModelStatus.kInfeasible:
            return LpSolution(LpStatus.INFEASIBLE, None, math.nan, None, it)
        if ms in (hs.HighsModelStatus.kUnbounded, hs.HighsModelStatus.kUnboundedOrInfeasible):
            # distinguish by a feasibility-only solve
            return self._classify_unbounded(it)
        if ms == hs.HighsModelStatus.kIterationLimit:
            return LpSolution(LpStatus.ITERATION_LIMIT, None, math.nan, None, it)
        raise NumericalFailure(f"HiGHS returned {h.modelStatusToString(ms)}")

    def _classify_unbounded(self, it) -> LpSolution:
        h = self.h
        n = self.lp.A.shape[1]
        h.changeColsCost(n, self._idx, np.zeros(n))
        h.run()
        feasible = h.getModelStatus() == self._hs.HighsModelStatus.kOptimal
        h.changeColsCost(n, self._idx, self.lp.c)
        status = LpStatus.UNBOUNDED if feasible else LpStatus.INFEASIBLE
        return LpSolution(status, None, math.nan, None, it)


def make_engine(lp: LinearProgram, backend: str = "auto",
                config: SimplexConfig | None = None):
    """`internal`, `highs`, or `auto` (internal for desk-scale LPs)."""
    if backend == "auto":
        m, n = lp.A.shape
        backend = "internal" if m * (m + n) <= 20_000 else "highs"
    if backend == "internal":
        return InternalEngine(lp, config)
    if backend == "highs":
        return HighsEngine(lp, config)
    raise ValueError(f"unknown LP backend {backend!r}")
