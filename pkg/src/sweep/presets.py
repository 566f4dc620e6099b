"""
Built-in run configurations loaded from ``config/presets.yaml``.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from src.sweep.run_config import RunConfig, parse_run_config
from src.utils.errors import ConfigValidationError

PRESETS_PATH = Path(__file__).parent.parent.parent / "config" / "presets.yaml"


def load_presets(path: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
    """Raw preset documents keyed by name, in file order."""
    preset_path = Path(path) if path else PRESETS_PATH
    if not preset_path.exists():
        raise ConfigValidationError("preset file not found", source=str(preset_path))
    with open(preset_path, 'r') as f:
        documents = yaml.safe_load(f) or {}
    if not isinstance(documents, dict):
        raise ConfigValidationError("preset file must map names to run configurations", source=str(preset_path))
    return documents


def preset_names(path: Optional[str] = None) -> List[str]:
    return list(load_presets(path))


def get_preset(name: str, dim_cap: Optional[int] = None, path: Optional[str] = None) -> RunConfig:
    """
    Build the RunConfig of a named preset.

    Args:
        name: Preset name, e.g. ``fig2a``
        dim_cap: Exact-diagonalization cap forwarded to validation
        path: Alternative preset file

    Returns:
        Validated RunConfig named after the preset

    Raises:
        ConfigValidationError: unknown name or invalid preset body
    """
    presets = load_presets(path)
    if name not in presets:
        raise ConfigValidationError(f"unknown preset '{name}' (available: {', '.join(presets)})",
                                    field="preset")
    document = dict(presets[name])
    document.setdefault('name', name)
    return parse_run_config(document, source=f"preset {name}", dim_cap=dim_cap)
