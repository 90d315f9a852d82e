"""The twelve-unit reference day: solve, validate, and write result files.

Uses the bundled reference case (normal forecast errors, 90 % chance
constraint, five price levels, no demand response). Expect one to two
minutes on a single core.

    python3 demos/reference_day.py [--time-limit SECONDS] [--out DIR]
"""

import argparse

from ucdr import analysis
from ucdr.branch_bound import SearchConfig, solve_uc
from ucdr.cli import data_path
from ucdr.io_formats import write_results
from ucdr.io_formats.tables import load_config_file, load_fleet_file, load_scenario_file

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--time-limit", type=float, default=300.0)
parser.add_argument("--out", default="demo_results/reference")
args = parser.parse_args()

cfg = load_config_file(data_path("reference_case.cfg"))
fleet = load_fleet_file(data_path("table1_fleet.csv"))
scenario = load_scenario_file(data_path("reference_scenario.csv"))
tariff, chance, init = cfg.tariff(), cfg.chance(), cfg.initial_state(fleet)

sol = solve_uc(fleet, scenario, tariff, chance, init, SearchConfig(time_limit=args.time_limit))
print(f"{sol.status.value}: profit {sol.objective:.2f}, bound {sol.bound:.2f}, "
      f"gap {sol.gap:.1e}, {sol.nodes} nodes in {sol.seconds:.0f}s")

sched = analysis.Schedule.from_solution(sol)
found = analysis.validate_schedule(sched, fleet, scenario, tariff, chance, init)
print(f"independent validator: {len(found)} violations")

report = analysis.make_report(sched, fleet, scenario, tariff)
print("committed units per hour:", " ".join(str(c) for c in report.committed))
print("price level per hour:    ", " ".join(str(k + 1) for k in sched.level_index()))
print(f"operation cost {report.operation_cost:.2f}, revenue {report.revenue.sum():.2f}")
paths = write_results(sol, report, args.out, tariff, sched)
print("wrote", ", ".join(str(p) for p in paths.values()))
