"""
harness - Experiment-Konfiguration, Monte-Carlo-Sweeps, Schranken-Pruefung und CLI.

Verwendung:
    from harness import ExperimentConfig, run_sweep, verify_bounds

    cfg = ExperimentConfig.from_file("config.yaml", overrides={"mode": "linear", "run.trials": 20})
    report = run_sweep(cfg)
    report.to_csv("reports/linear.csv")
    result = verify_bounds(report)
    result.passed
"""

from . import bounds
from .config import ExperimentConfig, log, set_verbose
from .sweep import REPORT_COLUMNS, Report, TrialRow, read_report_csv, run_sweep, run_trial
from .verify import CheckLine, MissingCountersError, VerificationResult, verify_bounds

__all__ = [
    "ExperimentConfig",
    "log",
    "set_verbose",
    "bounds",
    "Report",
    "TrialRow",
    "REPORT_COLUMNS",
    "run_sweep",
    "run_trial",
    "read_report_csv",
    "verify_bounds",
    "CheckLine",
    "VerificationResult",
    "MissingCountersError",
]
