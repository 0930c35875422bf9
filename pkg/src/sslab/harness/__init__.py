"""Scenario catalog, run configuration, reports and the command line."""
from .report import CheckRecord, emit_report, parse_report
from .scenarios import SCENARIOS, list_scenarios

__all__ = ["CheckRecord", "SCENARIOS", "emit_report", "list_scenarios", "parse_report"]
