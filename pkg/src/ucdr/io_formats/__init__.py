"""Readers and writers for fleet, scenario, config, results and MPS files."""

from .generator import InvalidSpec, ScenarioSpec, generate_scenario
from .mps import export_mps, read_mps
from .results import read_schedule, write_results
from .tables import (CaseConfig, ParseError, dump_fleet, dump_scenario, load_config,
                     load_fleet, load_scenario, read_text)

__all__ = [
    "CaseConfig", "InvalidSpec", "ParseError", "ScenarioSpec", "dump_fleet", "dump_scenario",
    "export_mps", "generate_scenario", "load_config", "load_fleet", "load_scenario",
    "read_mps", "read_schedule", "read_text", "write_results",
]
