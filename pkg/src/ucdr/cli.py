"""Command-line entry point: ``ucdr <subcommand> [options]``.

Case inputs come from ``--config`` (default: the bundled reference case),
whose ``fleet`` and ``scenario`` entries may be overridden by ``--fleet``
and ``--scenario``; the remaining flags override single config keys.

Exit codes: 0 success, 1 model infeasible, 2 input error, 3 node or time
limit reached (the incumbent, if any, is still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from . import analysis
from .branch_bound import MilpStatus, SearchConfig, solve_uc
from .domain import ChanceSpec, Distribution, Fleet, InitialState, Scenario, Tariff, UcdrError
from .formulation import build
from .io_formats import (ScenarioSpec, dump_scenario, export_mps, generate_scenario,
                         read_schedule, write_results)
from .io_formats.tables import (CaseConfig, load_config_file, load_fleet_file,
                                load_scenario_file, resolve)
from .stochastics import reserve_offset

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT = 0, 1, 2, 3
SWEEP_SIGMAS = (3.0, 6.0, 9.0)

log = logging.getLogger("ucdr")


def data_path(name: str) -> Path:
    """Path of a bundled fixture file."""
    return Path(str(resources.files("ucdr") / "data" / name))


@dataclass(frozen=True)
class Case:
    fleet: Fleet
    scenario: Scenario
    tariff: Tariff
    chance: ChanceSpec
    init: InitialState
    search: SearchConfig


def _levels(text):
    try:
        return tuple(float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated prices, got {text!r}")


def _drop(text):
    parts = text.split(",")
    try:
        a, b, f = int(parts[0]), int(parts[1]), float(parts[2])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError("expected START,END,FRACTION, e.g. 17,20,0.1")
    return (a, b, f)


def _case_flags(p: argparse.ArgumentParser, suffix=""):
    p.add_argument("--fleet" + suffix, metavar="PATH", help="fleet CSV (id,b,p_max,...)")
    p.add_argument("--scenario" + suffix, metavar="PATH", help="scenario CSV (t,demand,wind,pv)")
    p.add_argument("--alpha" + suffix, type=float, metavar="F",
                   help="probability that the balance row holds")
    p.add_argument("--dist" + suffix, choices=("normal", "laplace", "none"),
                   help="forecast-error distribution; none gives the deterministic model")
    p.add_argument("--elasticity" + suffix, type=float, metavar="F",
                   help="price elasticity of demand, <= 0")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH",
                   help="case config file (default: bundled reference case)")
    _case_flags(p)
    p.add_argument("--levels", type=_levels, metavar="CSV", help="absolute price levels, ascending")
    p.add_argument("--rbar", type=float, metavar="F", help="mean price bound")
    p.add_argument("--node-limit", type=int, metavar="N", help="branch-and-bound node cap")
    p.add_argument("--time-limit", type=float, metavar="SECONDS", help="wall-clock cap per solve")
    p.add_argument("--out", metavar="DIR", default="results", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ucdr",
        description="Profit-maximizing unit commitment with demand response and chance-"
                    "constrained reserve.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log search progress")
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")

    g = sub.add_parser("gen", help="write a synthetic scenario CSV")
    g.add_argument("--seed", type=int, default=1, metavar="N")
    g.add_argument("--peak", type=float, default=170.0, metavar="MW")
    g.add_argument("--pv-capacity", type=float, default=30.0, metavar="MW")
    g.add_argument("--wind-capacity", type=float, default=30.0, metavar="MW")
    g.add_argument("--wind-drop", type=_drop, metavar="A,B,F",
                   help="scale wind of clock hours A..B by F")
    g.add_argument("--sigma-d", type=float, default=0.0, metavar="MW")
    g.add_argument("--sigma-w", type=float, default=3.0, metavar="MW")
    g.add_argument("--sigma-p", type=float, default=3.0, metavar="MW")
    g.add_argument("--out", metavar="PATH", default="scenario.csv", help="scenario file to write")

    s = sub.add_parser("solve", help="solve one case and write schedule, metrics and summary")
    _common(s)
    r = sub.add_parser("reserve", help="stochastic solve plus tariff-fixed deterministic "
                                       "re-solve; writes the spinning-reserve series")
    _common(r)
    w = sub.add_parser("sweep", help="solve sigma_w = sigma_p in {3, 6, 9} MW and tabulate")
    _common(w)
    c = sub.add_parser("compare", help="two labelled cases side by side; case B inherits A "
                                       "and applies the --*-b overrides")
    _common(c)
    _case_flags(c, "-b")
    c.add_argument("--labels", default="A,B", metavar="A,B", help="labels of the two cases")
    e = sub.add_parser("export-mps", help="write the case MILP in fixed-format MPS")
    _common(e)
    e.set_defaults(out="case.mps")
    v = sub.add_parser("validate", help="check a schedule CSV against every model constraint")
    _common(v)
    v.add_argument("--schedule", required=True, metavar="PATH", help="schedule.csv to check")
    v.set_defaults(out=None)
    return parser


def load_case(args, suffix="") -> Case:
    """Assemble one case from the config file and command-line overrides."""
    def flag(name, fallback=None):
        v = getattr(args, name + suffix, None) if suffix else None
        if v is None:
            v = getattr(args, name, None)
        return fallback if v is None else v

    cfg_path = Path(args.config) if args.config else data_path("reference_case.cfg")
    cfg: CaseConfig = load_config_file(cfg_path)
    over = {}
    if flag("alpha") is not None:
        over["alpha"] = flag("alpha")
    if flag("dist") is not None:
        over["distribution"] = Distribution.parse(flag("dist"))
    if flag("elasticity") is not None:
        over["elasticity"] = flag("elasticity")
    if args.levels is not None:
        over["levels"] = args.levels
    if args.rbar is not None:
        over["rbar"] = args.rbar
    cfg = replace(cfg, **over)

    fleet_path = flag("fleet") or resolve(cfg_path, cfg.fleet) or data_path("table1_fleet.csv")
    scen_path = (flag("scenario") or resolve(cfg_path, cfg.scenario)
                 or data_path("reference_scenario.csv"))
    fleet = load_fleet_file(fleet_path, cfg.ramp_fraction)
    scenario = cfg.check_horizon(load_scenario_file(scen_path))
    search = cfg.search_config()
    if args.node_limit is not None:
        search = replace(search, node_limit=args.node_limit)
    if args.time_limit is not None:
        search = replace(search, time_limit=args.time_limit)
    return Case(fleet, scenario, cfg.tariff(), cfg.chance(), cfg.initial_state(fleet), search)


def _solve(case: Case):
    return solve_uc(case.fleet, case.scenario, case.tariff, case.chance, case.init, case.search)


def _status_code(*solutions) -> int:
    code = EXIT_OK
    for sol in solutions:
        if sol.status is MilpStatus.INFEASIBLE:
            return EXIT_INFEASIBLE
        if sol.status in (MilpStatus.LIMIT_REACHED, MilpStatus.FEASIBLE_WITH_GAP):
            code = EXIT_LIMIT
    return code


def _report(case: Case, sol, reserve=None):
    if sol.x is None:
        return None, None
    sched = analysis.Schedule.from_solution(sol)
    return sched, analysis.make_report(sched, case.fleet, case.scenario, case.tariff, reserve)


def _print_summary(label, sol, report):
    line = f"{label}: {sol.status.value}"
    if sol.x is not None:
        line += (f", profit {sol.objective:.4f}, bound {sol.bound:.4f}, gap {sol.gap:.2e}, "
                 f"nodes {sol.nodes}")
    if report is not None:
        line += f", operation cost {report.operation_cost:.4f}"
    print(line)


def cmd_gen(args) -> int:
    spec = ScenarioSpec(seed=args.seed, peak_demand=args.peak, pv_capacity=args.pv_capacity,
                        wind_capacity=args.wind_capacity, wind_drop=args.wind_drop,
                        sigma_d=args.sigma_d, sigma_w=args.sigma_w, sigma_p=args.sigma_p)
    text = dump_scenario(generate_scenario(spec))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    case = load_case(args)
    sol = _solve(case)
    sched, report = _report(case, sol)
    write_results(sol, report, args.out, case.tariff, sched)
    _print_summary("solve", sol, report)
    return _status_code(sol)


def _reserve_text(study) -> str:
    lines = ["t,stochastic_output,deterministic_output,spinning_reserve,offset"]
    ps = analysis.Schedule.from_solution(study.stochastic).p.sum(axis=1)
    pd = analysis.Schedule.from_solution(study.deterministic).p.sum(axis=1)
    for t, (a, b, r) in enumerate(zip(ps, pd, study.reserve), start=1):
        lines.append(f"{t},{a:.6f},{b:.6f},{r:.6f},{study.offset:.6f}")
    return "\n".join(lines) + "\n"


def cmd_reserve(args) -> int:
    case = load_case(args)
    sol = _solve(case)
    if sol.x is None:
        write_results(sol, None, args.out, case.tariff)
        _print_summary("stochastic", sol, None)
        return _status_code(sol)
    study = analysis.reserve_study(case.fleet, case.scenario, case.tariff, case.chance,
                                   case.init, case.search, stochastic=sol)
    sched, report = _report(case, sol, study.reserve)
    out = Path(args.out)
    write_results(sol, report, out, case.tariff, sched)
    write_results(study.deterministic, _report(case, study.deterministic)[1],
                  out / "deterministic", case.tariff)
    (out / "reserve.csv").write_text(_reserve_text(study), encoding="utf-8")
    _print_summary("stochastic", sol, report)
    _print_summary("deterministic", study.deterministic, None)
    print(f"offset {study.offset:.4f} MW, spinning reserve min {study.reserve.min():.4f} "
          f"max {study.reserve.max():.4f} MW")
    return _status_code(sol, study.deterministic)


def cmd_sweep(args) -> int:
    base = load_case(args)
    out = Path(args.out)
    lines = ["sigma,offset,status,objective,operation_cost,mean_lfc_margin,committed_unit_hours"]
    codes = []
    # one CPU is the common case here, so members run one after another in label order
    for sig in SWEEP_SIGMAS:
        case = replace(base, scenario=base.scenario.with_sigmas(sigma_w=sig, sigma_p=sig))
        sol = _solve(case)
        sched, report = _report(case, sol)
        write_results(sol, report, out / f"sigma_{sig:g}", case.tariff, sched)
        off = reserve_offset(case.chance, case.scenario.sigmas)
        if report is None:
            lines.append(f"{sig:g},{off:.6f},{sol.status.value},,,,")
        else:
            lines.append(f"{sig:g},{off:.6f},{sol.status.value},{sol.objective:.6f},"
                         f"{report.operation_cost:.6f},{report.lfc_margin.mean():.6f},"
                         f"{int(report.committed.sum())}")
        _print_summary(f"sigma {sig:g}", sol, report)
        codes.append(sol)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return _status_code(*codes)


def cmd_compare(args) -> int:
    labels = [s.strip() for s in args.labels.split(",")]
    if len(labels) != 2 or len(set(labels)) != 2 or not all(labels):
        raise UcdrError("--labels needs two distinct names, e.g. wind1,wind2")
    cases = [load_case(args), load_case(args, "_b")]
    out = Path(args.out)
    reports, sols = [], []
    for label, case in zip(labels, cases):
        sol = _solve(case)
        sched, report = _report(case, sol)
        write_results(sol, report, out / label, case.tariff, sched)
        _print_summary(label, sol, report)
        sols.append(sol)
        if report is not None:
            reports.append((label, report))
    if len(reports) == 2:
        cmp = analysis.compare_cases(reports)
        a, b = labels
        lines = [f"t,committed_{a},committed_{b},delta_{b}"]
        lines += [",".join(str(v) for v in row) for row in cmp.rows()]
        (out / "compare.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        summary = [f"{'metric':<22}{a:>16}{b:>16}{'delta':>16}"]
        for metric in ("operation_cost", "profit", "peak_demand", "demand_spread"):
            va, vb = getattr(cmp, metric)[a], getattr(cmp, metric)[b]
            summary.append(f"{metric:<22}{va:>16.4f}{vb:>16.4f}{vb - va:>16.4f}")
        (out / "compare.txt").write_text("\n".join(summary) + "\n", encoding="utf-8")
        print("\n".join(summary))
    return _status_code(*sols)


def cmd_export(args) -> int:
    case = load_case(args)
    problem = build(case.fleet, case.scenario, case.tariff, case.chance, case.init)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(export_mps(problem), encoding="utf-8")
    print(f"wrote {out}: {problem.n_cols} columns, {problem.n_rows} rows, {problem.A.nnz} nonzeros")
    return EXIT_OK


def cmd_validate(args) -> int:
    case = load_case(args)
    sched = read_schedule(Path(args.schedule).read_text(encoding="utf-8"), case.tariff.L)
    found = analysis.validate_schedule(sched, case.fleet, case.scenario, case.tariff,
                                       case.chance, case.init)
    lines = [f"{len(found)} violation(s)"] + [str(v) for v in found]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "reserve": cmd_reserve, "sweep": cmd_sweep,
            "compare": cmd_compare, "export-mps": cmd_export, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UcdrError, ValueError, OSError) as exc:
        print(f"ucdr {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
