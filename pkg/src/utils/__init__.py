"""
Utility modules for mobisim.

This package holds the scenario configuration layer shared by the simulator
and the command line.
"""

from utils.config_manager import DEFAULT_CONFIG, ConfigManager, merge_configs, validate_config

__all__ = [
    "ConfigManager",
    "DEFAULT_CONFIG",
    "merge_configs",
    "validate_config",
]
