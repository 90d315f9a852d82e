"""A five-unit, six-hour day solved step by step.

Builds the MILP, solves its LP relaxation with the in-house simplex, runs
branch and bound, then checks the schedule with the independent validator
and prints the per-hour economics. Runs in a couple of seconds.
"""

import numpy as np

from ucdr import analysis
from ucdr.branch_bound import SearchConfig, solve_uc
from ucdr.domain import (ChanceSpec, Fleet, InitialState, Scenario, Tariff, UnitState,
                         table1_fleet)
from ucdr.formulation import build
from ucdr.simplex import LinearProgram, solve_lp

fleet = Fleet(table1_fleet().units[2:7])           # two 15 MW units and three 6 MW peakers
scenario = Scenario(demand=[22, 25, 30, 33, 29, 24], wind=[3, 3, 2, 2, 3, 3],
                    pv=[0, 1, 2, 2, 1, 0], sigma_d=0.0, sigma_w=1.0, sigma_p=1.0)
tariff = Tariff(10.0, (8.0, 10.0, 12.0), -0.3)     # three price levels, elastic demand
chance = ChanceSpec(0.9, "normal")
init = InitialState(tuple([UnitState(1, 11.0, 24)] * 2 + [UnitState(0, 0.0, 24)] * 3))

problem = build(fleet, scenario, tariff, chance, init)
print(f"MILP: {problem.n_cols} columns, {problem.n_rows} rows, {problem.A.nnz} nonzeros")

relax = solve_lp(LinearProgram.from_milp(problem))
print(f"LP relaxation bound on profit: {-relax.objective:.2f} ({relax.iterations} pivots)")

sol = solve_uc(fleet, scenario, tariff, chance, init, SearchConfig(), problem=problem)
print(f"branch and bound: {sol.status.value}, profit {sol.objective:.2f}, "
      f"{sol.nodes} nodes, gap {sol.gap:.1e}")

sched = analysis.Schedule.from_solution(sol)
print("validator:", analysis.validate_schedule(sched, fleet, scenario, tariff, chance, init)
      or "no violations")
report = analysis.make_report(sched, fleet, scenario, tariff)
print("\n hour  price  demand  output  units  marginal")
for t in range(scenario.T):
    mc = report.marginal_cost[t]
    print(f"{t:5d} {report.selected_price[t]:6.1f} {report.realized_demand[t]:7.2f} "
          f"{sched.p[t].sum():7.2f} {report.committed[t]:6d} "
          f"{'-' if mc is None else f'{mc:8.2f}'}")
print(f"\nrevenue {report.revenue.sum():.2f}, operation cost {report.operation_cost:.2f}, "
      f"profit {report.profit:.2f}")
print("mean price", np.mean(report.selected_price), "<= rbar", tariff.mean_price_rbar)
