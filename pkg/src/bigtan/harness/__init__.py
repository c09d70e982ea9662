"""Seeded verification runs: configuration, check registry, reports and CLI."""

from .checks import CHECKS, REGISTRY, Check
from .config import RunConfig, load_config
from .suite import CheckReport, emit_report, run_suite

__all__ = ["CHECKS", "REGISTRY", "Check", "CheckReport", "RunConfig", "emit_report", "load_config", "run_suite"]
