"""Independent reference computations used by the tests.

Nothing here imports the model builder or the solvers under test: each
oracle re-derives what it needs from the raw case data.
"""

import itertools

import numpy as np
from scipy import integrate
from scipy.optimize import LinearConstraint, Bounds, linprog, milp

from ucdr.domain import (ChanceSpec, Fleet, InitialState, Scenario, Tariff, ThermalUnit,
                         UnitState)


# --- distributions -------------------------------------------------------------

def normal_cdf_by_integration(x):
    pdf = lambda s: np.exp(-s * s / 2) / np.sqrt(2 * np.pi)
    if x >= 0:
        return 0.5 + integrate.quad(pdf, 0.0, x, epsabs=1e-14, epsrel=1e-14)[0]
    return 0.5 - integrate.quad(pdf, x, 0.0, epsabs=1e-14, epsrel=1e-14)[0]


def bisect_quantile(cdf, alpha, lo=-20.0, hi=20.0, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)


# --- LP vertex enumeration ---------------------------------------------------------

def vertex_enumeration(c, A, sense, rhs, lo, hi):
    """Minimum of c @ x over a bounded polytope by visiting every basic solution."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    # inequality form G x <= h, with bounds as rows
    G, h = [], []
    for k in range(m):
        if sense[k] in ("L", "E"):
            G.append(A[k]); h.append(rhs[k])
        if sense[k] in ("G", "E"):
            G.append(-A[k]); h.append(-rhs[k])
    eye = np.eye(n)
    for j in range(n):
        G.append(eye[j]); h.append(hi[j])
        G.append(-eye[j]); h.append(-lo[j])
    G = np.array(G)
    h = np.array(h)
    best = None
    for rows in itertools.combinations(range(len(h)), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            val = float(c @ x)
            if best is None or val < best:
                best = val
    return best


# --- tiny unit-commitment instances ----------------------------------------------------

def random_tiny_case(seed):
    """N <= 3, T <= 4, L <= 2 case that is feasible by construction.

    Unit 1 starts committed at full output with a long run behind it and
    alone covers the largest possible net load, so "unit 1 on at p_max,
    cheapest price level everywhere" is always feasible.
    """
    rng = np.random.default_rng(seed)
    N = int(rng.integers(1, 4))
    T = int(rng.integers(2, 5))
    if N * T > 9:
        T = 9 // N
    L = int(rng.integers(1, 3))
    rbar = 10.0
    levels = (rbar,) if L == 1 else (0.8 * rbar, 1.2 * rbar)
    eps = float(rng.choice([0.0, -0.3]))
    tariff = Tariff(rbar, levels, eps)
    m_max = max((r / rbar) ** eps for r in levels)
    sigma = float(rng.choice([0.0, 1.0]))
    chance = ChanceSpec(0.9, "normal") if rng.random() < 0.7 else ChanceSpec.deterministic()
    offset = 1.2816 * np.sqrt(2) * sigma if not chance.is_deterministic else 0.0

    units = []
    states = []
    for i in range(N):
        p_max = float(rng.integers(10, 40))
        p_min = float(np.round(rng.uniform(0.1, 0.6) * p_max, 1))
        ramp = float(np.round(rng.uniform(0.2, 1.0) * p_max, 1))
        units.append(ThermalUnit(i + 1, float(np.round(rng.uniform(1, 9), 2)),
                                 float(rng.integers(0, 300)), p_max, p_min,
                                 ramp, float(np.round(rng.uniform(0.2, 1.0) * p_max, 1)),
                                 int(rng.integers(1, 3)), int(rng.integers(1, 3))))
        if i == 0:
            states.append(UnitState(1, p_max, 5))
        else:
            on = int(rng.integers(0, 2))
            states.append(UnitState(on, p_max if on else 0.0, int(rng.integers(1, 3))))
    fleet = Fleet(tuple(units))
    cap = units[0].p_max
    demand = rng.uniform(0.2, 0.9, T) * cap
    wind = rng.uniform(0, 0.1, T) * cap
    pv = rng.uniform(0, 0.1, T) * cap
    # largest realized demand plus reserve stays within unit 1 plus renewables
    demand = np.minimum(demand, (cap + wind + pv - offset - 0.5) / m_max)
    demand = np.maximum(demand, 0.5)
    scenario = Scenario(demand, wind, pv, 0.0, sigma, sigma)
    return fleet, scenario, tariff, chance, InitialState(tuple(states))


def _dispatch_lp(fleet, scenario, tariff, chance_offset, init, u, w):
    """Best p, z for fixed commitment u (T x N) and one-hot w (T x L); returns profit or None."""
    T, N = u.shape
    r = np.asarray(tariff.levels)
    m = (r / tariff.mean_price_rbar) ** tariff.elasticity_eps
    d = np.asarray(scenario.demand)
    realized = d * (w @ m)
    revenue = float(np.sum(d * (w @ (r * m))))
    b = np.array([un.fuel_cost_b for un in fleet])
    S = np.array([un.startup_cost_S for un in fleet])
    u0 = np.array([st.committed_u0 for st in init])
    p0 = np.array([st.output_p0 for st in init])
    prev = np.vstack([u0, u[:-1]])
    z = np.maximum(0.0, u - prev)       # cheapest z meeting z >= u_t - u_{t-1}, z >= 0
    start_cost = float(np.sum(z * S))
    # variables p[t, i], index t*N + i
    nv = T * N
    A, ub = [], []
    lo = np.zeros(nv)
    hi = np.zeros(nv)
    for t in range(T):
        for i, un in enumerate(fleet):
            lo[t * N + i] = u[t, i] * un.p_min
            hi[t * N + i] = u[t, i] * un.p_max
    for t in range(T):
        row = np.zeros(nv)
        row[t * N:(t + 1) * N] = -1.0
        A.append(row)
        ub.append(-(realized[t] + chance_offset - scenario.wind[t] - scenario.pv[t]))
    for i, un in enumerate(fleet):
        for t in range(T):
            up_lim = (u[t - 1, i] if t else u0[i]) * un.ramp_up + \
                (1 - (u[t - 1, i] if t else u0[i])) * un.p_min
            dn_lim = u[t, i] * un.ramp_down + (1 - u[t, i]) * un.p_max
            row = np.zeros(nv)
            row[t * N + i] = 1.0
            if t:
                row[(t - 1) * N + i] = -1.0
                A.append(row.copy()); ub.append(up_lim)
                A.append(-row); ub.append(dn_lim)
            else:
                A.append(row.copy()); ub.append(up_lim + p0[i])
                A.append(-row); ub.append(dn_lim - p0[i])
    res = linprog(np.tile(b, T), A_ub=np.array(A), b_ub=np.array(ub),
                  bounds=list(zip(lo, hi)), method="highs")
    if res.status != 0:
        return None
    return revenue - float(res.fun) - start_cost, res.x.reshape(T, N), z


def _windows_ok(u, fleet, init):
    T, N = u.shape
    for i, un in enumerate(fleet):
        st = init[i]
        col = [st.committed_u0] + list(u[:, i])
        for s in range(1, T + 1):
            if col[s] == 1 and col[s - 1] == 0:
                if any(col[k] == 0 for k in range(s + 1, min(T, s + un.min_up) + 1)):
                    return False
            if col[s] == 0 and col[s - 1] == 1:
                if any(col[k] == 1 for k in range(s + 1, min(T, s + un.min_down) + 1)):
                    return False
        tau = un.min_up if st.committed_u0 == 1 else un.min_down
        for k in range(1, min(T, tau - st.run_length) + 1):
            if col[k] != st.committed_u0:
                return False
    return True


def brute_force(fleet, scenario, tariff, chance_offset, init):
    """Best profit over every commitment and price-level assignment."""
    T, N, L = scenario.T, len(fleet), tariff.L
    r = np.asarray(tariff.levels)
    m = (r / tariff.mean_price_rbar) ** tariff.elasticity_eps
    d = np.asarray(scenario.demand)
    p_max = np.array([un.p_max for un in fleet])
    best = None
    w_options = []
    for choice in itertools.product(range(L), repeat=T):
        w = np.zeros((T, L))
        w[np.arange(T), choice] = 1.0
        if np.mean(w @ r) > tariff.mean_price_rbar + 1e-9:
            continue
        if np.sum(d * (w @ m)) < d.sum() - 1e-9:
            continue
        w_options.append(w)
    for bits in itertools.product((0.0, 1.0), repeat=T * N):
        u = np.array(bits).reshape(T, N)
        if not _windows_ok(u, fleet, init):
            continue
        for w in w_options:
            need = d * (w @ m) + chance_offset - np.asarray(scenario.wind) - np.asarray(scenario.pv)
            if np.any(u @ p_max < need - 1e-9):
                continue
            res = _dispatch_lp(fleet, scenario, tariff, chance_offset, init, u, w)
            if res is not None and (best is None or res[0] > best[0]):
                best = (res[0], u, w)
    return best


# --- MILP oracle -----------------------------------------------------------------------

def scipy_milp(problem, gap=1e-9):
    """Optimal profit of a MilpProblem via scipy's MILP solver (or None when infeasible)."""
    lo = np.where(problem.sense == "L", -np.inf, problem.rhs)
    hi = np.where(problem.sense == "G", np.inf, problem.rhs)
    res = milp(problem.cost, constraints=LinearConstraint(problem.A, lo, hi),
               integrality=np.asarray(problem.integrality, dtype=int),
               bounds=Bounds(problem.lo, problem.hi), options={"mip_rel_gap": gap})
    if res.status != 0:
        return None
    return -(res.fun + problem.constant), res.x
