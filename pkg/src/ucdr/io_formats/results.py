"""Result files of one solve.

``schedule.csv``
    t, p_1..p_N (MW), u_1..u_N, z_1..z_N, level (1-based price level), price
``metrics.csv``
    t, marginal_cost (blank when no unit runs), spinning_reserve (blank when
    not computed), lfc_margin, revenue, fuel_cost, startup_cost,
    realized_demand, price
``summary.txt``
    status, objective (profit), bound, gap, nodes, revenue, operation_cost

Every number has a fixed format, and nothing time-dependent is written,
so identical runs give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..analysis import Schedule, ScheduleReport
from ..branch_bound import MilpSolution
from ..domain import Tariff, UcdrError
from .tables import ParseError, _content_lines, _number, _split

METRICS_HEADER = ("t", "marginal_cost", "spinning_reserve", "lfc_margin", "revenue",
                  "fuel_cost", "startup_cost", "realized_demand", "price")


def _g(v) -> str:
    """Schedule values: 12 significant digits, enough for the validator's tolerance."""
    s = format(float(v), ".12g")
    return "0" if s == "-0" else s


def _f(v) -> str:
    s = f"{float(v):.6f}"
    return "0.000000" if s == "-0.000000" else s


def schedule_text(schedule: Schedule, tariff: Tariff) -> str:
    N = schedule.N
    head = (["t"] + [f"p_{i + 1}" for i in range(N)] + [f"u_{i + 1}" for i in range(N)]
            + [f"z_{i + 1}" for i in range(N)] + ["level", "price"])
    lines = [",".join(head)]
    levels = schedule.level_index()
    for t in range(schedule.T):
        row = [str(t + 1)]
        row += [_g(v) for v in schedule.p[t]]
        row += [str(int(round(v))) for v in schedule.u[t]]
        row += [_g(round(v, 9)) for v in schedule.z[t]]
        row += [str(int(levels[t]) + 1), _g(tariff.levels[levels[t]])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def metrics_text(report: ScheduleReport) -> str:
    lines = [",".join(METRICS_HEADER)]
    for t in range(report.T):
        mc = report.marginal_cost[t]
        rs = None if report.spinning_reserve is None else report.spinning_reserve[t]
        row = [str(t + 1), "" if mc is None else _f(mc), "" if rs is None else _f(rs),
               _f(report.lfc_margin[t]), _f(report.revenue[t]), _f(report.fuel_cost[t]),
               _f(report.startup_cost[t]), _f(report.realized_demand[t]),
               _f(report.selected_price[t])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def summary_text(solution: MilpSolution, report: ScheduleReport | None) -> str:
    lines = [f"status = {solution.status.value}"]
    if solution.x is not None:
        lines.append(f"objective = {_f(solution.objective)}")
    lines += [f"bound = {_f(solution.bound)}" if np.isfinite(solution.bound) else "bound = none",
              f"gap = {solution.gap:.6e}" if np.isfinite(solution.gap) else "gap = none",
              f"nodes = {solution.nodes}"]
    if report is not None:
        lines += [f"revenue = {_f(report.revenue.sum())}",
                  f"operation_cost = {_f(report.operation_cost)}",
                  f"peak_realized_demand = {_f(np.max(report.realized_demand))}"]
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UcdrError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_results(solution: MilpSolution, report: ScheduleReport | None, out_dir,
                  tariff: Tariff, schedule: Schedule | None = None) -> dict:
    """Write schedule.csv, metrics.csv and summary.txt into `out_dir`; returns the paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UcdrError(f"cannot create {out}: {exc.strerror or exc}") from exc
    paths = {"summary": out / "summary.txt"}
    _write(paths["summary"], summary_text(solution, report))
    if solution.x is not None:
        schedule = schedule or Schedule.from_solution(solution)
        paths["schedule"] = out / "schedule.csv"
        _write(paths["schedule"], schedule_text(schedule, tariff))
    if report is not None:
        paths["metrics"] = out / "metrics.csv"
        _write(paths["metrics"], metrics_text(report))
    return paths


def read_schedule(text: str, L: int) -> Schedule:
    """Parse a schedule.csv back into a Schedule with `L` price levels."""
    lines = list(_content_lines(text))
    if not lines:
        raise ParseError(1, None, "empty schedule file")
    k0, head = lines[0]
    names = [s.strip() for s in _split(head)]
    if not names or names[0] != "t" or "level" not in names:
        raise ParseError(k0, None, "schedule header must start with 't' and contain 'level'")
    N = sum(1 for n in names if n.startswith("p_"))
    for kind in "puz":
        want = [f"{kind}_{i + 1}" for i in range(N)]
        if [n for n in names if n.startswith(kind + "_")] != want:
            raise ParseError(k0, kind, f"expected columns {kind}_1..{kind}_{N}")
    rows = []
    for k, line in lines[1:]:
        fields = _split(line)
        if len(fields) != len(names):
            raise ParseError(k, None, f"expected {len(names)} fields, found {len(fields)}")
        row = dict(zip(names, fields))
        t = _number(row["t"], k, "t", integer=True)
        if t != len(rows) + 1:
            raise ParseError(k, "t", f"expected step {len(rows) + 1}, found {t}")
        lev = _number(row["level"], k, "level", integer=True)
        if not 1 <= lev <= L:
            raise ParseError(k, "level", f"price level {lev} outside 1..{L}")
        rows.append(([_number(row[f"p_{i + 1}"], k, f"p_{i + 1}") for i in range(N)],
                     [_number(row[f"u_{i + 1}"], k, f"u_{i + 1}") for i in range(N)],
                     [_number(row[f"z_{i + 1}"], k, f"z_{i + 1}") for i in range(N)],
                     lev))
    if not rows:
        raise ParseError(k0, None, "schedule file has no data rows")
    p = np.array([r[0] for r in rows], dtype=float)
    u = np.array([r[1] for r in rows], dtype=float)
    z = np.array([r[2] for r in rows], dtype=float)
    w = np.zeros((len(rows), L))
    for t, r in enumerate(rows):
        w[t, r[3] - 1] = 1.0
    return Schedule(p, u, z, w)
