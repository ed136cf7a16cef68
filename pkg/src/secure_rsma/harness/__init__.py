"""Monte Carlo experiment engine, CSV output and command line."""

from secure_rsma.harness.config import ConfigError, ExperimentConfig, load_config, reference_config, parse_config
from secure_rsma.harness.engine import BerCurve, BerPoint, SimulationError, run_experiment, theory_curve
from secure_rsma.harness.report import emit_csv, format_csv

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "reference_config",
    "parse_config",
    "BerCurve",
    "BerPoint",
    "SimulationError",
    "run_experiment",
    "theory_curve",
    "emit_csv",
    "format_csv",
]
