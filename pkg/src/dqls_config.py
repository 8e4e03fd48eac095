"""
Toolkit Configuration
YAML-backed settings with environment and command-line overrides
"""

import copy
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from linalg_core import RankTolerance, ToleranceMode

logger = logging.getLogger(__name__)

CONFIG_FILE_NAME = "dqls_config.yaml"
TOL_ENV_VAR = "DQLS_TOL"


def get_default_config() -> Dict[str, Any]:
    """Get default toolkit configuration"""
    return {
        'numerics': {
            'tolerance_mode': 'relative',
            'tolerance': 1e-10,
            'determinant_threshold': 1e-8,
            'max_ambient_dim': 4096,
            'max_superoperator_dim': 64,
        },
        'table': {
            'seeds': 20,
            'base_seed': 0,
            'workers': 4,
            'geometric_max_dim': 512,
            'max_coefficient_entries': 4_000_000,
        },
        'dynamics': {
            'max_resamples': 10,
            'dt': 0.05,
        },
        'logging': {
            'level': 'INFO',
            'dir': 'logs',
        },
    }


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_file: Optional[Path] = None) -> Dict[str, Any]:
    """Defaults overlaid with the YAML file, then with DQLS_TOL"""
    config = get_default_config()
    if config_file is not None and Path(config_file).exists():
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                file_config = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ValueError(f"Invalid YAML in config file {config_file}: {e}")
        if not isinstance(file_config, dict):
            raise ValueError(f"Config file {config_file} must contain a mapping")
        config = _merge(config, file_config)

    env_tol = os.environ.get(TOL_ENV_VAR)
    if env_tol:
        try:
            config['numerics']['tolerance'] = float(env_tol)
        except ValueError:
            raise ValueError(f"{TOL_ENV_VAR} must be a number, got '{env_tol}'")
        logger.debug(f"Tolerance overridden by {TOL_ENV_VAR}={env_tol}")
    return config


def save_config(config: Dict[str, Any], config_file: Path):
    """Save configuration to a YAML file"""
    config_file = Path(config_file)
    config_file.parent.mkdir(parents=True, exist_ok=True)
    with open(config_file, 'w', encoding='utf-8') as f:
        yaml.dump(config, f, default_flow_style=False, indent=2)


def tolerance_from_config(config: Dict[str, Any], cli_tol: Optional[float] = None) -> RankTolerance:
    """RankTolerance from the numerics section; a command-line value wins"""
    numerics = config.get('numerics', {})
    value = cli_tol if cli_tol is not None else numerics.get('tolerance', 1e-10)
    mode = ToleranceMode(numerics.get('tolerance_mode', 'relative'))
    return RankTolerance(mode, float(value))
