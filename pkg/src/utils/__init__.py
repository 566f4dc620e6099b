"""Utility modules for the persistent-current simulator."""

from .config_manager import ConfigManager
from .logger import setup_logger, configure_root_logger, get_pipeline_logger, PipelineLogger, log_function_call
from . import errors

__all__ = [
    'ConfigManager',
    'setup_logger',
    'configure_root_logger',
    'get_pipeline_logger',
    'PipelineLogger',
    'log_function_call',
    'errors',
]
