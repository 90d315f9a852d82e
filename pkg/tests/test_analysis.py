import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import scipy_milp
from ucdr import analysis
from ucdr.analysis import Schedule
from ucdr.domain import (ChanceSpec, InitialState, Scenario, Tariff, DimensionMismatch,
                         table1_fleet)
from ucdr.formulation import build

FLEET = table1_fleet()


def empty(T=3, N=12, L=1):
    return Schedule(np.zeros((T, N)), np.zeros((T, N)), np.zeros((T, N)), np.eye(L)[[0] * T])


def test_marginal_cost():
    s = empty()
    s.u[0, [0, 4, 10]] = 1
    s.u[1, 2] = 1
    assert analysis.marginal_cost(s, FLEET) == [9.0, 3.3, None]


def test_lfc_margin():
    s = empty()
    s.u[0, 0], s.p[0, 0] = 1, 50.0
    s.u[1, 0], s.p[1, 0] = 1, 47.0
    assert list(analysis.lfc_margin(s, FLEET)) == [0.0, 2.5, 0.0]


def test_spinning_reserve_trivial():
    s = empty()
    assert np.all(analysis.spinning_reserve(s, s) == 0)
    with pytest.raises(DimensionMismatch):
        analysis.spinning_reserve(s, empty(T=4))


def test_profit_terms():
    sc = Scenario([100.0, 120.0, 80.0], [0.0] * 3, [0.0] * 3)
    flat = Tariff(10.0, (10.0,))
    s = empty()
    terms = analysis.profit_breakdown(s, flat, sc, FLEET)
    assert list(terms.revenue) == [1000.0, 1200.0, 800.0]
    assert terms.operation_cost == 0
    s.z[1, 0] = 1
    assert analysis.profit_breakdown(s, flat, sc, FLEET).startup.sum() == 1000.0


def test_realized_demand():
    sc = Scenario([100.0, 120.0], [0.0] * 2, [0.0] * 2)
    s = empty(T=2, L=2)
    assert np.array_equal(analysis.realized_demand(s, Tariff(10.0, (10.0, 12.0)), sc),
                          [100.0, 120.0])
    s.w[:] = [0, 1]
    got = analysis.realized_demand(s, Tariff(10.0, (10.0, 12.0), -0.3), sc)
    assert np.allclose(got / [100.0, 120.0], 1.2 ** -0.3, rtol=0, atol=1e-15)


def solved(reference):
    prob = build(reference.fleet, reference.scenario, reference.tariff, reference.chance,
                 reference.init)
    profit, x = scipy_milp(prob, 1e-9)
    p, u, z, w = prob.layout.split(x)
    return prob, Schedule(p, np.round(u), z, np.round(w), profit)


@pytest.fixture(scope="module")
def optimum(reference):
    return solved(reference)


def test_validator_accepts_optimum(reference, optimum):
    prob, s = optimum
    r = reference
    assert analysis.validate_schedule(s, r.fleet, r.scenario, r.tariff, r.chance, r.init) == []
    report = analysis.make_report(s, r.fleet, r.scenario, r.tariff)
    assert report.profit == pytest.approx(s.objective, rel=1e-6)
    d = report.realized_demand
    assert d.sum() >= np.sum(r.scenario.demand) - 1e-6
    lfc = report.lfc_margin
    assert np.all(lfc >= -1e-6) and np.all(lfc <= 0.05 * FLEET.column("p_max").sum() + 1e-9)


def corrupt(s, **changes):
    arrays = {k: getattr(s, k).copy() for k in "puzw"}
    for (name, idx), v in changes.items():
        arrays[name][idx] = v
    return Schedule(**arrays)


def test_validator_flags_capacity(reference, optimum):
    _, s = optimum
    r = reference
    bad = Schedule(s.p.copy(), s.u.copy(), s.z.copy(), s.w.copy())
    bad.u[5, 0] = 1
    bad.p[5, 0] = 60.0
    tags = {v.tag for v in analysis.validate_schedule(bad, r.fleet, r.scenario, r.tariff,
                                                      r.chance, r.init)}
    assert "Eq12" in tags


def test_validator_flags_min_up():
    fleet = table1_fleet()
    T = 6
    sc = Scenario([30.0] * T, [0.0] * T, [0.0] * T)
    init = InitialState.all_off(fleet)
    s = empty(T=T)
    s.u[1, 4], s.p[1, 4], s.z[1, 4] = 1, 2.0, 1       # on for a single step, then off
    found = analysis.validate_schedule(s, fleet, sc, Tariff(10.0, (10.0,)),
                                       ChanceSpec.deterministic(), init)
    assert any(v.tag == "Eq15" and v.indices[1] == 5 for v in found)


def test_validator_flags_each_family(reference, optimum):
    _, s = optimum
    r = reference
    args = (r.fleet, r.scenario, r.tariff, r.chance, r.init)

    def tags(sched):
        return {v.tag for v in analysis.validate_schedule(sched, *args)}

    bad = Schedule(s.p.copy(), s.u.copy(), s.z.copy(), s.w.copy())
    bad.w[3] = 0
    assert "Eq3" in tags(bad)
    bad = Schedule(s.p * 0.5, s.u.copy(), s.z.copy(), s.w.copy())
    assert "Eq7" in tags(bad)
    bad = Schedule(s.p.copy(), s.u.copy(), np.zeros_like(s.z), s.w.copy())
    if s.z.sum() > 0:
        assert "Eq17" in tags(bad)
    top = np.zeros_like(s.w)
    top[:, -1] = 1
    assert "Eq4" in tags(Schedule(s.p, s.u, s.z, top))


def test_compare_cases(reference, optimum):
    _, s = optimum
    rep = analysis.make_report(s, reference.fleet, reference.scenario, reference.tariff)
    cmp = analysis.compare_cases([("a", rep), ("b", rep)])
    assert np.all(cmp.delta("b") == 0)
    assert cmp.delta("b", "peak_demand") == 0
    assert all(row[-1] == 0 for row in cmp.rows())
    short = analysis.make_report(empty(T=2), reference.fleet,
                                 Scenario([1.0, 1.0], [0, 0], [0, 0]), Tariff(10.0, (10.0,)))
    with pytest.raises(DimensionMismatch):
        analysis.compare_cases([("a", rep), ("b", short)])


def test_reserve_study_zero_sigma():
    from oracles import random_tiny_case
    fleet, sc, tariff, _, init = random_tiny_case(4)
    sc = sc.with_sigmas(0, 0, 0)
    study = analysis.reserve_study(fleet, sc, tariff, ChanceSpec(0.9, "normal"), init)
    assert np.all(study.reserve == 0) and study.offset == 0


@settings(max_examples=30, deadline=None)
@given(t=st.integers(0, 23), i=st.integers(0, 11), excess=st.floats(0.01, 40.0))
def test_validator_flags_any_overload(reference, optimum, t, i, excess):
    _, s = optimum
    r = reference
    bad = Schedule(s.p.copy(), s.u.copy(), s.z.copy(), s.w.copy())
    bad.p[t, i] = bad.u[t, i] * FLEET[i].p_max + excess
    found = analysis.validate_schedule(bad, r.fleet, r.scenario, r.tariff, r.chance, r.init)
    assert any(v.tag in ("Eq12", "Eq13", "Eq14") and v.indices[:2] == (t + 1, i + 1)
               for v in found)


@settings(max_examples=50, deadline=None)
@given(eps=st.floats(-1.0, 0.0), picks=st.lists(st.integers(0, 2), min_size=1, max_size=6))
def test_realized_demand_follows_elasticity(eps, picks):
    levels = (8.0, 10.0, 12.0)
    T = len(picks)
    sc = Scenario([50.0 + 10 * k for k in range(T)], [0.0] * T, [0.0] * T)
    s = Schedule(np.zeros((T, 1)), np.zeros((T, 1)), np.zeros((T, 1)), np.eye(3)[picks])
    got = analysis.realized_demand(s, Tariff(10.0, levels, eps), sc)
    want = [d * (levels[k] / 10.0) ** eps for d, k in zip(sc.demand, picks)]
    assert np.allclose(got, want, rtol=1e-14, atol=0)
