import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ucdr.cli import data_path  # noqa: E402
from ucdr.io_formats.tables import (load_config_file, load_fleet_file,  # noqa: E402
                                    load_scenario_file)


class Case:
    def __init__(self, scenario_name="reference_scenario.csv"):
        cfg = load_config_file(data_path("reference_case.cfg"))
        self.config = cfg
        self.fleet = load_fleet_file(data_path("table1_fleet.csv"))
        self.scenario = load_scenario_file(data_path(scenario_name))
        self.tariff = cfg.tariff()
        self.chance = cfg.chance()
        self.init = cfg.initial_state(self.fleet)


@pytest.fixture(scope="session")
def reference():
    return Case()


@pytest.fixture(scope="session")
def wind_drop():
    return Case("wind_drop_scenario.csv")


def pytest_terminal_summary(terminalreporter):
    from criteria_log import RESULTS
    if not RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(RESULTS):
        passed, detail = RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
