"""
Configuration Manager for the persistent-current simulator

Handles loading and managing configuration settings from various sources
including YAML files, a .env file, environment variables, and default values.
"""

import os
import yaml
from typing import Dict, Any, Optional
from pathlib import Path
from dataclasses import dataclass

from dotenv import load_dotenv


@dataclass
class NumericsConfig:
    """Tolerances and steps shared by the numerical kernels."""
    tol_im: float
    rigidity_floor: float
    zero_guard: float
    delta_phi: float
    ep_gap_tol: float
    ep_rigidity_tol: float
    ep_nudge: float
    degenerate_denominator: float


@dataclass
class SweepConfig:
    """Configuration for sweep execution."""
    max_workers: int
    output_dir: str


@dataclass
class OracleConfig:
    """Configuration for the exact-diagonalization oracle."""
    dim_cap: int
    eta: float


@dataclass
class LoggingConfig:
    """Configuration for log output."""
    level: str
    use_rich: bool
    log_file: Optional[str]


class ConfigManager:
    """Manages configuration for the simulator."""

    ENV_MAPPINGS = {
        'NH_CURRENT_WORKERS': ['sweep', 'max_workers'],
        'NH_CURRENT_OUTPUT_DIR': ['sweep', 'output_dir'],
        'NH_CURRENT_DIM_CAP': ['oracle', 'dim_cap'],
        'NH_CURRENT_LOG_LEVEL': ['logging', 'level'],
    }
    INT_KEYS = {'max_workers', 'dim_cap'}

    def __init__(self, config_path: Optional[str] = None):
        """
        Initialize configuration manager.

        Args:
            config_path: Path to configuration file. If None, uses default config.
        """
        self.config_path = config_path or self._get_default_config_path()
        self._config = self._load_config()

    def _get_default_config_path(self) -> str:
        """Get default configuration file path."""
        return str(Path(__file__).parent.parent.parent / "config" / "config.yaml")

    def _load_config(self) -> Dict[str, Any]:
        """Load configuration from file and environment variables."""
        config = {}

        if os.path.exists(self.config_path):
            with open(self.config_path, 'r') as f:
                config = yaml.safe_load(f) or {}

        load_dotenv(override=False)
        config = self._apply_env_overrides(config)

        return self._apply_defaults(config)

    def _apply_env_overrides(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """Apply environment variable overrides to configuration."""
        for env_var, config_path in self.ENV_MAPPINGS.items():
            value = os.getenv(env_var)
            if value:
                current = config
                for key in config_path[:-1]:
                    current = current.setdefault(key, {})

                if config_path[-1] in self.INT_KEYS:
                    value = int(value)

                current[config_path[-1]] = value

        return config

    def _apply_defaults(self, config: Dict[str, Any]) -> Dict[str, Any]:
        """Apply default values to configuration."""
        defaults = {
            'numerics': {
                'tol_im': 1e-9,
                'rigidity_floor': 1e-10,
                'zero_guard': 1e-12,
                'delta_phi': 1e-4,
                'ep_gap_tol': 1e-3,
                'ep_rigidity_tol': 0.1,
                'ep_nudge': 1e-9,
                'degenerate_denominator': 1e-10,
            },
            'sweep': {
                'max_workers': 4,
                'output_dir': 'output',
            },
            'oracle': {
                'dim_cap': 2000,
                'eta': 0.03,
            },
            'logging': {
                'level': 'INFO',
                'use_rich': True,
                'log_file': None,
            },
        }

        return self._deep_merge(defaults, config)

    def _deep_merge(self, default: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        """Deep merge two dictionaries."""
        result = default.copy()

        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._deep_merge(result[key], value)
            else:
                result[key] = value

        return result

    @property
    def numerics(self) -> NumericsConfig:
        """Get numerical tolerances."""
        cfg = self._config['numerics']
        return NumericsConfig(
            tol_im=float(cfg['tol_im']),
            rigidity_floor=float(cfg['rigidity_floor']),
            zero_guard=float(cfg['zero_guard']),
            delta_phi=float(cfg['delta_phi']),
            ep_gap_tol=float(cfg['ep_gap_tol']),
            ep_rigidity_tol=float(cfg['ep_rigidity_tol']),
            ep_nudge=float(cfg['ep_nudge']),
            degenerate_denominator=float(cfg['degenerate_denominator']),
        )

    @property
    def sweep(self) -> SweepConfig:
        """Get sweep configuration."""
        cfg = self._config['sweep']
        return SweepConfig(
            max_workers=int(cfg['max_workers']),
            output_dir=str(cfg['output_dir']),
        )

    @property
    def oracle(self) -> OracleConfig:
        """Get oracle configuration."""
        cfg = self._config['oracle']
        return OracleConfig(
            dim_cap=int(cfg['dim_cap']),
            eta=float(cfg['eta']),
        )

    @property
    def logging(self) -> LoggingConfig:
        """Get logging configuration."""
        cfg = self._config['logging']
        return LoggingConfig(
            level=str(cfg['level']),
            use_rich=bool(cfg['use_rich']),
            log_file=cfg.get('log_file'),
        )

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value by key."""
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def to_dict(self) -> Dict[str, Any]:
        """Return configuration as dictionary."""
        return self._config.copy()
