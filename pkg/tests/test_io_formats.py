import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ucdr.cli import data_path
from ucdr.domain import ChanceSpec, Distribution, Tariff, ThermalUnit, table1_fleet
from ucdr.formulation import build
from ucdr.io_formats import (InvalidSpec, ParseError, ScenarioSpec, dump_fleet, dump_scenario,
                             export_mps, generate_scenario, load_config, load_fleet,
                             load_scenario, read_mps)
from ucdr.io_formats.tables import read_text

HEADER = "id,b,p_max,p_min,ramp_up,ramp_down,min_up,min_down,S"


def test_fixture_fleet():
    fleet = load_fleet(read_text(data_path("table1_fleet.csv")))
    assert fleet.N == 12
    assert fleet[7].fuel_cost_b == 7.1 and fleet[7].startup_cost_S == 200.0
    assert fleet == table1_fleet()


def test_fleet_round_trip_bit_exact():
    fleet = table1_fleet()
    assert load_fleet(dump_fleet(fleet)) == fleet
    odd = load_fleet(HEADER + "\n1,0.1,33.333333333333336,1e-3,0.7,0.7,2,2,12.5\n")
    assert load_fleet(dump_fleet(odd)) == odd
    assert odd[0].p_max == 33.333333333333336


finite = st.floats(0.001, 1e4, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(b=finite, p_max=finite, share=st.floats(0.0, 1.0), ramp=finite, start=finite,
       times=st.tuples(st.integers(1, 24), st.integers(1, 24)))
def test_fleet_round_trip_property(b, p_max, share, ramp, start, times):
    unit = ThermalUnit(7, b, start, p_max, p_max * share, ramp, ramp, *times)
    from ucdr.domain import Fleet
    fleet = Fleet((unit,))
    assert load_fleet(dump_fleet(fleet)) == fleet


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_mps_round_trip_random(seed):
    import scipy.sparse as sp
    from ucdr.formulation import MilpProblem
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(0, 6)), int(rng.integers(1, 8))
    A = sp.random(m, n, density=0.5, random_state=rng,
                  data_rvs=lambda k: rng.normal(0, 1e3, k)).tocsr()
    lo = np.where(rng.random(n) < 0.2, -np.inf, rng.normal(0, 10, n))
    base = np.where(np.isfinite(lo), lo, 0.0)
    hi = np.where(rng.random(n) < 0.2, np.inf, base + rng.uniform(0, 5, n))
    integ = rng.random(n) < 0.4
    lo[integ], hi[integ] = 0.0, 1.0
    prob = MilpProblem(cost=rng.normal(0, 1, n) * 10.0 ** rng.integers(-6, 6, n),
                       constant=float(rng.normal()), A=A,
                       sense=rng.choice(["L", "G", "E"], m).astype("<U1"),
                       rhs=rng.normal(0, 100, m), lo=lo, hi=hi, integrality=integ,
                       layout=None, tags=())
    text = export_mps(prob)
    assert_same_problem(prob, read_mps(text))
    assert export_mps(read_mps(text)) == text


def test_fleet_errors():
    with pytest.raises(ParseError) as err:
        load_fleet("id,b,p_max,p_min,ramp_up,ramp_down,min_up,min_down\n1,3,50,25,1,1,3,3\n")
    assert err.value.column == "S"
    with pytest.raises(ParseError) as err:
        load_fleet(HEADER + "\n1,3,50,25,0.5,0.5,3,3,1000\n2,3,50,25,fast,0.5,3,3,1000\n")
    assert err.value.line == 3 and err.value.column == "ramp_up"
    with pytest.raises(ParseError):
        load_fleet(HEADER + "\n1,3,50,25,0,5,0.5,3,3,1000\n")       # decimal comma
    with pytest.raises(ParseError):
        load_fleet(HEADER + "\n1,3,50,25,0.5,0.5,2.5,3,1000\n")


def test_reference_scenario_fixture():
    sc = load_scenario(read_text(data_path("reference_scenario.csv")))
    assert sc.T == 24 and sc.sigmas == (0.0, 3.0, 3.0)
    assert sc == generate_scenario(ScenarioSpec(seed=2))


def test_scenario_parsing():
    body = "t,demand,wind,pv\n1,100,10,0\n2,110,12,1\n"
    sc = load_scenario("sigma_w = 3\nsigma_p = 3\n" + body)
    assert sc.sigma_d == 0.0 and sc.sigmas == (0.0, 3.0, 3.0)
    with pytest.raises(ParseError) as err:
        load_scenario("t,demand,wind,pv\n1,100,10,0\n1,110,12,1\n")
    assert err.value.line == 3
    with pytest.raises(ParseError):
        load_scenario("t,demand,wind,pv\n1,100,10,0\n3,110,12,1\n")
    with pytest.raises(ParseError):
        load_scenario("sigma_x = 1\n" + body)
    assert load_scenario(dump_scenario(sc)) == sc


def test_generator_defaults():
    sc = generate_scenario(ScenarioSpec(seed=1))
    d, pv, w = np.array(sc.demand), np.array(sc.pv), np.array(sc.wind)
    assert abs(d.max() - 170.0) <= 1.0
    assert d.min() == pytest.approx(0.6 * 170.0)
    assert pv.max() <= 30.0 + 1e-12 and pv[12] == pytest.approx(30.0)
    assert np.all(pv[:6] == 0) and np.all(pv[19:] == 0)
    assert np.all(w >= 0.2 * 30 - 1e-9) and np.all(w <= 0.9 * 30 + 1e-9)
    again = generate_scenario(ScenarioSpec(seed=1))
    assert again.demand == sc.demand and again.wind == sc.wind


def test_generator_wind_drop():
    base = np.array(generate_scenario(ScenarioSpec(seed=3)).wind)
    drop = np.array(generate_scenario(ScenarioSpec(seed=3, wind_drop=(17, 20, 0.1))).wind)
    hours = np.arange(24)
    win = (hours >= 17) & (hours <= 20)
    assert np.array_equal(drop[win], base[win] * 0.1)
    assert np.array_equal(drop[~win], base[~win])
    with pytest.raises(InvalidSpec):
        generate_scenario(ScenarioSpec(wind_drop=(20, 30, 0.1)))
    with pytest.raises(InvalidSpec):
        generate_scenario(ScenarioSpec(wind_drop=(17, 20, 1.5)))
    with pytest.raises(InvalidSpec):
        generate_scenario(ScenarioSpec(pv_capacity=-1.0))


def test_config_parsing():
    cfg = load_config(read_text(data_path("reference_case.cfg")))
    assert cfg.alpha == 0.9 and cfg.distribution is Distribution.NORMAL
    assert cfg.tariff().levels == pytest.approx((7.0, 8.5, 10.0, 11.5, 13.0))
    fleet = table1_fleet()
    init = cfg.initial_state(fleet)
    assert init[0].committed_u0 == 1 and init[0].output_p0 == 35.0
    assert init[5].committed_u0 == 0 and init[5].run_length == 24
    cfg = load_config("distribution = none\nlevels = 8, 10, 12\nramp_fraction = yes\n")
    assert cfg.chance().is_deterministic and cfg.tariff().L == 3 and cfg.ramp_fraction
    for bad, line in (("alpha = 0,9\n", 1), ("# c\nspeed = 3\n", 2),
                      ("[initial_state]\n1 = 1, 35\n", 2), ("alpha = 2\n", 0)):
        with pytest.raises(ParseError) as err:
            load_config(bad)
        assert err.value.line == line


def small_problem():
    sc = generate_scenario(ScenarioSpec(seed=5, horizon=4, peak_demand=60.0))
    from ucdr.domain import Fleet
    fleet = Fleet(table1_fleet().units[2:7])
    return build(fleet, sc, Tariff(10.0, (8.0, 10.0, 12.0), -0.3), ChanceSpec(0.9, "normal"))


def assert_same_problem(a, b, rel=1e-10):
    def close(x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        fin = np.isfinite(x)
        assert np.array_equal(fin, np.isfinite(y)) and np.array_equal(x[~fin], y[~fin])
        assert np.all(np.abs(x[fin] - y[fin]) <= rel * np.maximum(1.0, np.abs(x[fin])))
    close(a.cost, b.cost)
    close(a.rhs, b.rhs)
    close(a.lo, b.lo)
    close(a.hi, b.hi)
    assert np.array_equal(a.sense, b.sense)
    assert np.array_equal(a.integrality, b.integrality)
    da, db = a.A.toarray(), b.A.toarray()
    assert np.array_equal(da != 0, db != 0)
    close(da[da != 0], db[da != 0])


def test_mps_round_trip_small():
    prob = small_problem()
    text = export_mps(prob)
    assert_same_problem(prob, read_mps(text))
    assert export_mps(prob) == text
    for line in text.splitlines():
        if line.startswith("    ") and "MARKER" not in line:
            assert len(line[4:12].strip()) <= 8


def test_mps_bounds_only():
    from ucdr.formulation import MilpProblem
    import scipy.sparse as sp
    prob = MilpProblem(cost=np.array([1.0, -2.0]), constant=0.0, A=sp.csr_matrix((0, 2)),
                       sense=np.array([], dtype="<U1"), rhs=np.array([]),
                       lo=np.array([0.0, -1.0]), hi=np.array([4.0, np.inf]),
                       integrality=np.array([False, False]), layout=None, tags=())
    text = export_mps(prob)
    rows = text.split("ROWS\n")[1].split("COLUMNS")[0].splitlines()
    assert rows == [" N  COST"]
    assert_same_problem(prob, read_mps(text))


def test_mps_malformed():
    with pytest.raises(ParseError):
        read_mps("NAME x\nROWS\n N  COST\nCOLUMNS\n    X1 COST abc\nENDATA\n")
    with pytest.raises(ParseError):
        read_mps("NAME x\nROWS\n N  COST\n")
