"""Run configurations, presets, the sweep driver, output writing and verification."""

from .run_config import (
    CURRENT_METHODS,
    EXACT_METHODS,
    RUN_CONFIG_SCHEMA,
    Grid,
    Method,
    RunConfig,
    parse_run_config,
    load_run_config,
)
from .presets import load_presets, preset_names, get_preset
from .writers import OutputWriter, resolve_output_dir
from .runner import PointResult, SweepResult, SweepRunner
from .verification import (
    DEFAULT_THRESHOLDS,
    CheckResult,
    VerificationReport,
    Verifier,
    parse_tolerances,
    sample_phases,
)

__all__ = [
    'CURRENT_METHODS',
    'EXACT_METHODS',
    'RUN_CONFIG_SCHEMA',
    'Grid',
    'Method',
    'RunConfig',
    'parse_run_config',
    'load_run_config',
    'load_presets',
    'preset_names',
    'get_preset',
    'OutputWriter',
    'resolve_output_dir',
    'PointResult',
    'SweepResult',
    'SweepRunner',
    'DEFAULT_THRESHOLDS',
    'CheckResult',
    'VerificationReport',
    'Verifier',
    'parse_tolerances',
    'sample_phases',
]
