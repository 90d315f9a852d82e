"""Profit-maximizing unit commitment with demand response and chance-constrained reserve."""

from .analysis import (Schedule, ScheduleReport, compare_cases, lfc_margin, make_report,
                       marginal_cost, profit_breakdown, realized_demand, reserve_study,
                       spinning_reserve, validate_schedule)
from .branch_bound import (Branching, MilpSolution, MilpStatus, SearchConfig, choose_branch_var,
                           merit_order_incumbent, solve_milp, solve_uc)
from .domain import (ChanceSpec, Distribution, Fleet, InitialState, Scenario, Tariff,
                     ThermalUnit, UcdrError, UnitState, default_tariff, table1_fleet)
from .formulation import MilpProblem, build, deterministic_variant, fix_tariff, layout
from .simplex import LinearProgram, LpStatus, solve_lp
from .stochastics import ErrorDistribution, quantile, reserve_offset

__version__ = "0.1.0"
