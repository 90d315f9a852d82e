"""How forecast uncertainty turns into reserve and cost.

First the reserve offset for growing wind/PV errors, then the reference
day re-solved at three error levels, then the spinning reserve implied
by comparing the chance-constrained plan with a plan that ignores the
errors under the same tariff. The three solves plus the re-solve take
several minutes on one core.
"""

import argparse

import numpy as np

from ucdr import analysis
from ucdr.branch_bound import SearchConfig, solve_uc
from ucdr.cli import data_path
from ucdr.domain import ChanceSpec
from ucdr.io_formats.tables import load_config_file, load_fleet_file, load_scenario_file
from ucdr.stochastics import reserve_offset

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--time-limit", type=float, default=900.0)
args = parser.parse_args()
search = SearchConfig(time_limit=args.time_limit)

cfg = load_config_file(data_path("reference_case.cfg"))
fleet = load_fleet_file(data_path("table1_fleet.csv"))
base = load_scenario_file(data_path("reference_scenario.csv"))
tariff, chance, init = cfg.tariff(), cfg.chance(), cfg.initial_state(fleet)

print("sigma  offset (MW) at alpha = 0.90, normal")
for s in (3.0, 6.0, 9.0):
    print(f"{s:5.0f}  {reserve_offset(chance, (0.0, s, s)):.4f}")
print("Laplace errors with the same sigma and alpha:",
      f"{reserve_offset(ChanceSpec(0.9, 'laplace'), (0.0, 3.0, 3.0)):.4f} MW")

solutions = {}
print("\nsigma  status          profit   operation cost   unit-hours")
for s in (3.0, 6.0, 9.0):
    scenario = base.with_sigmas(sigma_w=s, sigma_p=s)
    sol = solve_uc(fleet, scenario, tariff, chance, init, search)
    solutions[s] = sol
    sched = analysis.Schedule.from_solution(sol)
    rep = analysis.make_report(sched, fleet, scenario, tariff)
    print(f"{s:5.0f}  {sol.status.value:<13} {sol.objective:9.2f} {rep.operation_cost:14.2f} "
          f"{int(rep.committed.sum()):10d}")

study = analysis.reserve_study(fleet, base, tariff, chance, init, search, stochastic=solutions[3.0])
print(f"\nspinning reserve against the error-blind plan (offset {study.offset:.2f} MW):")
print(np.array2string(study.reserve, precision=2, max_line_width=90))
