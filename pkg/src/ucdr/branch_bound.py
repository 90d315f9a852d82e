"""Best-bound branch and bound over the binary commitment and tariff variables."""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .domain import ChanceSpec, Fleet, InitialState, Scenario, Tariff, UcdrError
from .formulation import MilpProblem, build
from .simplex import LinearProgram, LpStatus, SimplexConfig, make_engine
from .stochastics import reserve_offset

log = logging.getLogger(__name__)


class NoFractional(UcdrError):
    pass


class Branching(str, enum.Enum):
    MOST_FRACTIONAL = "MostFractional"
    FIRST_FRACTIONAL = "FirstFractional"
    RELIABILITY = "Reliability"     # pseudocosts, seeded by strong branching


class MilpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE_WITH_GAP = "FeasibleWithGap"
    INFEASIBLE = "Infeasible"
    LIMIT_REACHED = "LimitReached"


@dataclass(frozen=True)
class SearchConfig:
    int_tol: float = 1e-6
    rel_gap: float = 1e-6
    abs_gap: float = 1e-9
    node_limit: int | None = 200_000
    time_limit: float | None = None
    branching: Branching = Branching.RELIABILITY
    lp_backend: str = "auto"
    propagate: bool = True
    reduced_cost_fixing: bool = True
    reliability: int = 4            # pseudocost observations before a column is trusted
    strong_candidates: int = 12     # strong-branching LPs per node, at most
    strong_lookahead: int = 4       # stop after this many non-improving candidates
    heuristic_every: int = 200      # nodes between improvement heuristics; 0 disables
    sub_node_limit: int = 300       # node budget of each improvement sub-MILP
    simplex: SimplexConfig = SimplexConfig()


@dataclass(eq=False)
class MilpSolution:
    status: MilpStatus
    x: np.ndarray | None
    objective: float           # profit of the incumbent
    bound: float               # certified profit upper bound
    gap: float
    nodes: int
    lp_solves: int = 0
    seconds: float = 0.0
    problem: MilpProblem | None = None

    @property
    def has_incumbent(self) -> bool:
        return self.x is not None

    def split(self):
        return self.problem.layout.split(self.x)


def relative_gap(bound: float, objective: float) -> float:
    if not (math.isfinite(bound) and math.isfinite(objective)):
        return math.inf
    return abs(bound - objective) / max(1.0, abs(objective))


def choose_branch_var(values, rule=Branching.MOST_FRACTIONAL, tol=1e-6, indices=None) -> int:
    """Index of the binary to branch on.

    `values` holds the LP values of the candidate binaries; `indices`
    (defaults to positions) gives their column numbers, which break ties.
    """
    values = np.asarray(values, dtype=float)
    idx = np.arange(len(values)) if indices is None else np.asarray(indices)
    frac = np.abs(values - np.round(values))
    cand = np.flatnonzero(frac > tol)
    if cand.size == 0:
        raise NoFractional("all candidate values are integral within tolerance")
    rule = Branching(rule)
    if rule is Branching.FIRST_FRACTIONAL:
        return int(idx[cand[np.argmin(idx[cand])]])
    score = np.minimum(values[cand] - np.floor(values[cand]),
                       np.ceil(values[cand]) - values[cand])
    best = score.max()
    ties = cand[score >= best - 1e-12]
    return int(idx[ties[np.argmin(idx[ties])]])


class _Propagator:
    """Activity-based bound propagation with integer rounding."""

    def __init__(self, problem: MilpProblem, tol=1e-9):
        A = problem.A.tocsr()
        self.m, self.n = A.shape
        self.rows = np.repeat(np.arange(self.m), np.diff(A.indptr))
        self.cols = A.indices.astype(np.int64)
        self.vals = A.data
        self.row_lo = np.where(problem.sense == "L", -np.inf, problem.rhs)
        self.row_hi = np.where(problem.sense == "G", np.inf, problem.rhs)
        self.integer = np.asarray(problem.integrality, dtype=bool)
        self.tol = tol

    def _activity(self, lo, hi):
        a = self.vals
        lo_c, hi_c = lo[self.cols], hi[self.cols]
        cmin = np.where(a > 0, a * lo_c, a * hi_c)
        cmax = np.where(a > 0, a * hi_c, a * lo_c)
        inf_min = ~np.isfinite(cmin)
        inf_max = ~np.isfinite(cmax)
        fmin = np.where(inf_min, 0.0, cmin)
        fmax = np.where(inf_max, 0.0, cmax)
        m = self.m
        smin = np.bincount(self.rows, fmin, m)
        smax = np.bincount(self.rows, fmax, m)
        nmin = np.bincount(self.rows, inf_min, m)
        nmax = np.bincount(self.rows, inf_max, m)
        return cmin, cmax, fmin, fmax, smin, smax, nmin, nmax, inf_min, inf_max

    def run(self, lo, hi, max_passes=20):
        """Tighten (lo, hi) in place; False when infeasibility is detected."""
        tol = 1e-6
        integer = self.integer
        r = self.rows
        a = self.vals
        for _ in range(max_passes):
            cmin, cmax, fmin, fmax, smin, smax, nmin, nmax, inf_min, inf_max = \
                self._activity(lo, hi)
            rmin = np.where(nmin > 0, -np.inf, smin)
            rmax = np.where(nmax > 0, np.inf, smax)
            if np.any(rmin > self.row_hi + tol) or np.any(rmax < self.row_lo - tol):
                return False
            # residual activity of the other entries in the row
            rest_min = np.where(inf_min, np.where(nmin[r] == 1, smin[r], -np.inf),
                                np.where(nmin[r] == 0, smin[r] - fmin, -np.inf))
            rest_max = np.where(inf_max, np.where(nmax[r] == 1, smax[r], np.inf),
                                np.where(nmax[r] == 0, smax[r] - fmax, np.inf))
            new_lo = lo.copy()
            new_hi = hi.copy()
            with np.errstate(invalid="ignore", divide="ignore"):
                up = self.row_hi[r] - rest_min      # a x_j <= up
                dn = self.row_lo[r] - rest_max      # a x_j >= dn
                pos = a > 0
                b1 = up / a
                b2 = dn / a
            hi_cand = np.where(pos, b1, b2)
            lo_cand = np.where(pos, b2, b1)
            ok_h = np.isfinite(hi_cand)
            ok_l = np.isfinite(lo_cand)
            np.minimum.at(new_hi, self.cols[ok_h], hi_cand[ok_h])
            np.maximum.at(new_lo, self.cols[ok_l], lo_cand[ok_l])
            new_lo[integer] = np.ceil(new_lo[integer] - tol)
            new_hi[integer] = np.floor(new_hi[integer] + tol)
            if np.any(new_lo > new_hi + tol):
                return False
            # continuous bounds only move on meaningful changes
            cont = ~integer
            new_lo[cont] = np.where(new_lo[cont] > lo[cont] + 1e-6, new_lo[cont], lo[cont])
            new_hi[cont] = np.where(new_hi[cont] < hi[cont] - 1e-6, new_hi[cont], hi[cont])
            new_lo = np.minimum(new_lo, new_hi)
            changed = np.any(new_lo != lo) or np.any(new_hi != hi)
            lo[:] = new_lo
            hi[:] = new_hi
            if not changed:
                break
        return True


@dataclass(eq=False)
class _Node:
    bound: float          # lower bound on the minimization objective
    depth: int
    ilo: np.ndarray       # integer-column bounds (int8)
    ihi: np.ndarray
    parent_obj: float = math.nan
    branch: int = -1      # position in int_idx of the parent's branching column
    up: bool = False
    frac: float = 0.0     # fractional part of that column at the parent
    basis: object = None  # parent's optimal basis, for the warm start


class _Search:
    def __init__(self, problem: MilpProblem, config: SearchConfig, depth_of_nesting=0):
        self.problem = problem
        self.cfg = config
        self.nesting = depth_of_nesting
        self.lp = LinearProgram.from_milp(problem)
        self.engine = make_engine(self.lp, config.lp_backend, config.simplex)
        self.int_idx = np.flatnonzero(problem.integrality)
        self.prop = _Propagator(problem) if config.propagate else None
        self.inc_x = None
        self.inc_obj = math.inf     # minimization objective
        self.lp_solves = 0
        self.nodes = 0
        self.start = time.perf_counter()
        self.root_lo = np.array(problem.lo, dtype=float)
        self.root_hi = np.array(problem.hi, dtype=float)
        k = len(self.int_idx)
        self.pc_sum = np.zeros((2, k))     # [down, up] objective gain per unit change
        self.pc_cnt = np.zeros((2, k))
        lay = problem.layout
        self.is_u = np.zeros(k, dtype=bool)
        if lay is not None:
            cols = self.int_idx
            self.is_u = (cols >= lay.u_range.start) & (cols < lay.u_range.stop)

    # bookkeeping -------------------------------------------------------
    def elapsed(self):
        return time.perf_counter() - self.start

    def prune_level(self):
        if not math.isfinite(self.inc_obj):
            return math.inf
        return self.inc_obj - max(self.cfg.abs_gap, self.cfg.rel_gap * max(1.0, abs(self.inc_obj)))

    def try_incumbent(self, x, source="") -> bool:
        """Accept `x` if it is integral, feasible and improving."""
        if x is None:
            return False
        x = np.array(x, dtype=float)
        xi = x[self.int_idx]
        if np.any(np.abs(xi - np.round(xi)) > self.cfg.int_tol):
            return False
        x[self.int_idx] = np.round(xi)
        x = self._recover_startups(x)
        p = self.problem
        if np.any(x < p.lo - 1e-6) or np.any(x > p.hi + 1e-6):
            return False
        if p.row_violations(x, 1e-6):
            return False
        obj = p.objective(x)
        if obj < self.inc_obj - 1e-12:
            self.inc_obj = obj
            self.inc_x = x
            if self.nesting == 0:
                log.debug("incumbent %.6f from %s at node %d", -obj, source, self.nodes)
            return True
        return False

    def _recover_startups(self, x):
        """z = max(0, u_t - u_{t-1}) wherever that keeps the startup rows exact."""
        lay = self.problem.layout
        if lay is None:
            return x
        p = self.problem
        trial = x.copy()
        _, u, z, _ = lay.split(trial)
        # initial commitment read back from the t = 1 startup row rhs (-u0)
        u0 = np.zeros(lay.N)
        for i in range(lay.N):
            k = _startup_row(p, lay, i)
            if k is not None:
                u0[i] = -p.rhs[k]
        prev = np.vstack([u0[None, :], u[:-1]])
        zr = np.maximum(0.0, u - prev)
        trial[np.array(lay.z_range)] = zr.ravel()
        if np.any(trial < p.lo - 1e-9) or np.any(trial > p.hi + 1e-9):
            return x
        if p.objective(trial) <= p.objective(x) + 1e-9:
            return trial
        return x

    # LP at a node --------------------------------------------------------
    def full_bounds(self, ilo, ihi):
        lo = self.root_lo.copy()
        hi = self.root_hi.copy()
        lo[self.int_idx] = ilo
        hi[self.int_idx] = ihi
        return lo, hi

    def lp_at(self, ilo, ihi, basis=None, propagate=True):
        """Propagate, then solve; (solution, ilo, ihi) or None when infeasible."""
        lo, hi = self.full_bounds(ilo, ihi)
        if propagate and self.prop is not None:
            plo, phi = lo.copy(), hi.copy()
            if not self.prop.run(plo, phi):
                return None
            lo[self.int_idx] = plo[self.int_idx]
            hi[self.int_idx] = phi[self.int_idx]
        sol = self.engine.solve(lo, hi, basis)
        self.lp_solves += 1
        if sol.status is LpStatus.INFEASIBLE:
            return None
        if sol.status is not LpStatus.OPTIMAL:
            raise UcdrError(f"LP relaxation ended with status {sol.status.value}")
        return sol, lo[self.int_idx].astype(np.int8), hi[self.int_idx].astype(np.int8)

    def fractional(self, xi, ilo, ihi):
        return np.flatnonzero((np.abs(xi - np.round(xi)) > self.cfg.int_tol) & (ilo < ihi))

    def reduced_cost_fix(self, sol, ilo, ihi):
        if not (self.cfg.reduced_cost_fixing and math.isfinite(self.inc_obj)):
            return ilo, ihi
        if sol.reduced_costs is None:
            return ilo, ihi
        slack = self.prune_level() - sol.objective
        xi = sol.x[self.int_idx]
        d = sol.reduced_costs[self.int_idx]
        free = ilo < ihi
        fix0 = free & (np.abs(xi - ilo) <= 1e-9) & (d > slack)
        fix1 = free & (np.abs(xi - ihi) <= 1e-9) & (-d > slack)
        ihi = np.where(fix0, ilo, ihi).astype(np.int8)
        ilo = np.where(fix1, ihi, ilo).astype(np.int8)
        return ilo, ihi

    def _record(self, k, up, frac, gain):
        if not math.isfinite(gain):
            return
        unit = (1.0 - frac) if up else frac
        self.pc_sum[int(up), k] += max(gain, 0.0) / max(unit, 1e-6)
        self.pc_cnt[int(up), k] += 1

    def _pseudocost(self):
        cnt = self.pc_cnt
        known = cnt > 0
        avg = np.where(known, self.pc_sum / np.maximum(cnt, 1), 0.0)
        for side in (0, 1):
            if known[side].any():
                avg[side][~known[side]] = avg[side][known[side]].mean()
            else:
                avg[side][:] = 1.0
        return avg

    # branching -------------------------------------------------------------
    def select(self, sol, ilo, ihi, cand):
        """(position, {value: child bound or None}) for the chosen branching column."""
        xi = sol.x[self.int_idx]
        rule = Branching(self.cfg.branching)
        if rule is not Branching.RELIABILITY:
            k = self.int_idx.tolist().index(
                choose_branch_var(xi[cand], rule, self.cfg.int_tol, self.int_idx[cand]))
            return k, {0: None, 1: None}
        f = xi[cand] - np.floor(xi[cand])
        pc = self._pseudocost()
        eps = 1e-6
        score = np.maximum(pc[0, cand] * f, eps) * np.maximum(pc[1, cand] * (1 - f), eps)
        # commitments first on equal score, then lowest column
        order = np.lexsort((self.int_idx[cand], ~self.is_u[cand], -score))
        reliable = np.minimum(self.pc_cnt[0, cand], self.pc_cnt[1, cand]) >= self.cfg.reliability
        best_k, best_score, best_children = int(cand[order[0]]), -1.0, {0: None, 1: None}
        basis = sol.basis
        stale = 0
        tried = 0
        for pos in order:
            k = int(cand[pos])
            if reliable[pos]:
                if best_score < 0:
                    best_k, best_score = k, float(score[pos])
                    best_children = {0: None, 1: None}
                continue
            if tried >= self.cfg.strong_candidates or stale >= self.cfg.strong_lookahead:
                continue
            tried += 1
            children = {}
            gains = []
            for v in (0, 1):
                clo, chi = ilo.copy(), ihi.copy()
                clo[k] = chi[k] = v
                res = self.lp_at(clo, chi, basis, propagate=False)
                obj = math.inf if res is None else res[0].objective
                children[v] = obj
                gain = obj - sol.objective
                self._record(k, v == 1, f[pos], gain if math.isfinite(gain) else math.inf)
                gains.append(gain)
            if not math.isfinite(gains[0]) or not math.isfinite(gains[1]):
                # one side infeasible: branch here at once
                return k, children
            sc = max(gains[0], eps) * max(gains[1], eps)
            if sc > best_score:
                best_k, best_score, best_children = k, sc, children
                stale = 0
            else:
                stale += 1
        return best_k, best_children

    # heuristics ------------------------------------------------------------
    def round_and_fix(self, sol, ilo, ihi):
        """Fix-and-propagate: integral columns first, then fractional ones by closeness."""
        xi = sol.x[self.int_idx]
        target = np.where(self.is_u, np.ceil(xi - 0.25), np.round(xi))
        target = np.clip(target, ilo, ihi)
        order = np.argsort(np.abs(target - xi), kind="stable")
        lo, hi = self.full_bounds(ilo, ihi)
        if self.prop is not None and not self.prop.run(lo, hi):
            return False
        for k in order:
            j = self.int_idx[k]
            if lo[j] == hi[j]:
                continue
            for v in (target[k], 1 - target[k]):
                tlo, thi = lo.copy(), hi.copy()
                tlo[j] = thi[j] = v
                if self.prop is None or self.prop.run(tlo, thi):
                    lo, hi = tlo, thi
                    break
            else:
                return False
        res = self.lp_at(lo[self.int_idx].astype(np.int8), hi[self.int_idx].astype(np.int8))
        if res is None:
            return False
        return self.try_incumbent(res[0].x, "round")

    def rins(self, sol, node_limit):
        """Sub-MILP fixing the binaries on which LP and incumbent agree."""
        if self.inc_x is None:
            return False
        xi = sol.x[self.int_idx]
        inc = self.inc_x[self.int_idx]
        agree = np.abs(xi - inc) <= 0.1
        if agree.all():
            return False
        lo = self.root_lo.copy()
        hi = self.root_hi.copy()
        cols = self.int_idx[agree]
        lo[cols] = inc[agree]
        hi[cols] = inc[agree]
        return self._sub_search(lo, hi, node_limit, "rins")

    def _sub_search(self, lo, hi, node_limit, source):
        sub_cfg = replace(self.cfg, node_limit=node_limit, heuristic_every=0,
                          time_limit=None, rel_gap=self.cfg.rel_gap)
        sub = _Search(self.problem.with_bounds(lo, hi), sub_cfg, self.nesting + 1)
        if self.inc_x is not None:
            sub.try_incumbent(self.inc_x)
        res = sub.run()
        self.lp_solves += sub.lp_solves
        if res.x is not None:
            return self.try_incumbent(res.x, source)
        return False

    def heuristics(self, sol, ilo, ihi, at_root=False):
        if self.nesting > 0:
            return
        if at_root or self.inc_x is None:
            self.round_and_fix(sol, ilo, ihi)
        if self.inc_x is not None:
            for _ in range(3 if at_root else 1):
                if not self.rins(sol, self.cfg.sub_node_limit):
                    break

    # main loop ---------------------------------------------------------------
    def limits_hit(self):
        c = self.cfg
        if c.node_limit is not None and self.nodes >= c.node_limit:
            return True
        if c.time_limit is not None and self.elapsed() >= c.time_limit:
            return True
        return False

    def process(self, node, heap, tick):
        res = self.lp_at(node.ilo, node.ihi, node.basis)
        self.nodes += 1
        if res is None:
            if node.branch >= 0:
                self._record(node.branch, node.up, node.frac, math.inf)
            return
        sol, ilo, ihi = res
        if node.branch >= 0 and node.depth > 0:
            self._record(node.branch, node.up, node.frac, sol.objective - node.parent_obj)
        if sol.objective >= self.prune_level():
            return
        xi = sol.x[self.int_idx]
        cand = self.fractional(xi, ilo, ihi)
        if cand.size == 0:
            self.try_incumbent(sol.x, "lp")
            return
        every = self.cfg.heuristic_every
        if every and (node.depth == 0 or self.nodes % every == 0):
            self.heuristics(sol, ilo, ihi, at_root=node.depth == 0)
            if sol.objective >= self.prune_level():
                return
        ilo, ihi = self.reduced_cost_fix(sol, ilo, ihi)
        cand = self.fractional(xi, ilo, ihi)
        if cand.size == 0:
            # reduced-cost fixing left only integral columns free; re-solve as a child
            heapq.heappush(heap, (sol.objective, -node.depth - 1, next(tick),
                                  _Node(sol.objective, node.depth + 1, ilo, ihi,
                                        basis=sol.basis)))
            return
        k, children = self.select(sol, ilo, ihi, cand)
        f = float(xi[k] - math.floor(xi[k]))
        for v in (0, 1):
            key = children.get(v)
            if key is None:
                key = sol.objective
            if not math.isfinite(key) or key >= self.prune_level():
                continue
            clo, chi = ilo.copy(), ihi.copy()
            clo[k] = chi[k] = v
            child = _Node(max(key, sol.objective), node.depth + 1, clo, chi,
                          sol.objective, k, v == 1, f, sol.basis)
            # rounding direction explored first among equal keys
            prefer = (v == 1) == (xi[k] >= 0.5)
            heapq.heappush(heap, (child.bound, -child.depth - (0.5 if prefer else 0.0),
                                  next(tick), child))

    def run(self, incumbents=()) -> MilpSolution:
        for x0 in incumbents:
            self.try_incumbent(x0, "start")
        ilo = self.root_lo[self.int_idx].astype(np.int8)
        ihi = self.root_hi[self.int_idx].astype(np.int8)
        tick = itertools.count()
        heap = [(-math.inf, 0, next(tick), _Node(-math.inf, 0, ilo, ihi))]
        hit = False
        last_log = time.perf_counter()
        while heap:
            bound = heap[0][0]
            if bound >= self.prune_level():
                heap.clear()
                break
            if self.limits_hit():
                hit = True
                break
            _, _, _, node = heapq.heappop(heap)
            self.process(node, heap, tick)
            if self.nesting == 0 and time.perf_counter() - last_log > 10:
                last_log = time.perf_counter()
                log.info("nodes %d open %d bound %.4f incumbent %.4f", self.nodes, len(heap),
                         -heap[0][0] if heap else math.nan, -self.inc_obj)
        return self._result(heap, hit)

    def _result(self, heap, hit) -> MilpSolution:
        has = self.inc_x is not None
        if heap:
            lb = min(self.inc_obj, heap[0][0])
        else:
            lb = self.inc_obj if has else math.inf
        obj = -self.inc_obj if has else math.nan
        bound = -lb
        gap = relative_gap(bound, obj) if has else math.inf
        if not has:
            status = MilpStatus.LIMIT_REACHED if hit else MilpStatus.INFEASIBLE
        elif not heap or gap <= self.cfg.rel_gap:
            status = MilpStatus.OPTIMAL
        elif hit:
            status = MilpStatus.LIMIT_REACHED
        else:
            status = MilpStatus.FEASIBLE_WITH_GAP
        return MilpSolution(status, self.inc_x, obj, bound if (has or heap) else math.nan,
                            gap, self.nodes, self.lp_solves, self.elapsed(), self.problem)


def _startup_row(problem, lay, i):
    """Row index of the t = 1 startup row of unit i (cached per problem)."""
    cache = getattr(problem, "_start_rows", None)
    if cache is None:
        cache = {}
        names = problem.names
        for k, name in enumerate(names):
            if name.startswith("START_1_"):
                cache[int(name.split("_")[2]) - 1] = k
        object.__setattr__(problem, "_start_rows", cache)
    return cache.get(i)


def solve_milp(problem: MilpProblem, config: SearchConfig | None = None,
               incumbents=()) -> MilpSolution:
    """Maximize profit over `problem`; `incumbents` are optional start points."""
    config = config or SearchConfig()
    return _Search(problem, config).run(incumbents)


def merit_order_incumbent(fleet: Fleet, scenario: Scenario, tariff: Tariff,
                          chance: ChanceSpec, init: InitialState | None = None,
                          problem: MilpProblem | None = None, config: SearchConfig | None = None,
                          max_repairs: int = 6):
    """Commit units in ascending fuel cost until capacity covers net load plus reserve.

    The commitment is smoothed to satisfy minimum up and down times, then
    dispatch (and the tariff choice) is optimized with commitments fixed.
    Returns the flat solution vector or None.
    """
    if problem is None:
        problem = build(fleet, scenario, tariff, chance, init)
    lay = problem.layout
    N, T = lay.N, lay.T
    if init is None:
        init = InitialState.all_off(fleet)
    order = np.argsort([u.fuel_cost_b for u in fleet], kind="stable")
    p_max = fleet.column("p_max")
    need = scenario.net_load() + reserve_offset(chance, scenario.sigmas)
    u_lo = np.asarray(problem.lo)[np.array(lay.u_range)].reshape(T, N)
    u_hi = np.asarray(problem.hi)[np.array(lay.u_range)].reshape(T, N)
    margin = 0.0
    sub_cfg = replace(config or SearchConfig(), heuristic_every=0, node_limit=2000, time_limit=30.0)
    for _ in range(max_repairs):
        u = u_lo.copy()
        for t in range(T):
            cap = float(p_max @ u[t])
            for i in order:
                if cap >= need[t] + margin:
                    break
                if u[t, i] == 0 and u_hi[t, i] == 1:
                    u[t, i] = 1
                    cap += p_max[i]
            if cap < need[t] + margin and margin == 0.0:
                return None
        u = _smooth_commitment(u, fleet, init, u_lo, u_hi)
        if u is None:
            return None
        lo = np.array(problem.lo)
        hi = np.array(problem.hi)
        idx = np.array(lay.u_range)
        lo[idx] = u.ravel()
        hi[idx] = u.ravel()
        sub = solve_milp(problem.with_bounds(lo, hi), sub_cfg)
        if sub.has_incumbent:
            return sub.x
        margin += 0.1 * float(np.max(need)) + 1.0
    return None


def _smooth_commitment(u, fleet, init, u_lo, u_hi, max_rounds=50):
    """Fill short off-gaps and extend short on-runs until windows are respected."""
    T, N = u.shape
    u = u.copy()
    for i, unit in enumerate(fleet):
        u0 = init[i].committed_u0
        for _ in range(max_rounds):
            changed = False
            col = np.concatenate([[u0], u[:, i]])
            for s in range(1, T + 1):
                if col[s] == 1 and col[s - 1] == 0:
                    end = min(T, s + unit.min_up)
                    if np.any(col[s:end + 1] == 0):
                        col[s:end + 1] = 1
                        changed = True
                elif col[s] == 0 and col[s - 1] == 1:
                    end = min(T, s + unit.min_down)
                    seg = col[s:end + 1]
                    if np.any(seg == 1):
                        # too short an off period: stay on instead
                        stop = s + int(np.flatnonzero(seg == 1)[0])
                        col[s:stop] = 1
                        changed = True
            u[:, i] = col[1:]
            if not changed:
                break
        if np.any(u[:, i] < u_lo[:, i]) or np.any(u[:, i] > u_hi[:, i]):
            u[:, i] = np.clip(u[:, i], u_lo[:, i], u_hi[:, i])
    return u


def solve_uc(fleet: Fleet, scenario: Scenario, tariff: Tariff, chance: ChanceSpec,
             init: InitialState | None = None, config: SearchConfig | None = None,
             problem: MilpProblem | None = None, starts=()) -> MilpSolution:
    """Build the case, seed it with the merit-order schedule (and `starts`), and search."""
    if problem is None:
        problem = build(fleet, scenario, tariff, chance, init)
    start = merit_order_incumbent(fleet, scenario, tariff, chance, init, problem, config)
    starts = list(starts) + ([start] if start is not None else [])
    return solve_milp(problem, config, starts)
