"""Price-responsive demand, and a four-hour evening wind collapse.

Compares the reference day with inelastic and elastic demand, then the
wind-drop day (wind at 10 % of forecast from 17:00 to 20:00) with and
without demand response. Four full-size solves; allow several minutes.
"""

import argparse

from ucdr import analysis
from ucdr.branch_bound import SearchConfig, solve_uc
from ucdr.cli import data_path
from ucdr.domain import Tariff
from ucdr.io_formats.tables import load_config_file, load_fleet_file, load_scenario_file

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--time-limit", type=float, default=900.0)
parser.add_argument("--elasticity", type=float, default=-0.3)
args = parser.parse_args()
search = SearchConfig(time_limit=args.time_limit)

cfg = load_config_file(data_path("reference_case.cfg"))
fleet = load_fleet_file(data_path("table1_fleet.csv"))
chance, init = cfg.chance(), cfg.initial_state(fleet)
flat = cfg.tariff()
elastic = Tariff(flat.mean_price_rbar, flat.levels, args.elasticity)


def run(label, scenario, tariff):
    sol = solve_uc(fleet, scenario, tariff, chance, init, search)
    sched = analysis.Schedule.from_solution(sol)
    print(f"{label}: {sol.status.value}, profit {sol.objective:.2f}, gap {sol.gap:.1e}")
    return label, analysis.make_report(sched, fleet, scenario, tariff)


def show(cmp):
    a, b = cmp.labels
    for metric in ("operation_cost", "profit", "peak_demand", "demand_spread"):
        va, vb = getattr(cmp, metric)[a], getattr(cmp, metric)[b]
        print(f"  {metric:<15}{va:12.2f}{vb:12.2f}{vb - va:+12.2f}")
    print("  committed units", a, cmp.committed[a].tolist())
    print("  committed units", b, cmp.committed[b].tolist())


day = load_scenario_file(data_path("reference_scenario.csv"))
drop = load_scenario_file(data_path("wind_drop_scenario.csv"))

print("demand response on the reference day")
show(analysis.compare_cases([run("flat", day, flat), run("elastic", day, elastic)]))
print("\nwind collapse, with and without demand response")
show(analysis.compare_cases([run("drop", drop, flat), run("drop+dr", drop, elastic)]))
