"""
Configuration management module.
Handles scenario defaults, JSON scenario files, CLI overrides and validation.
"""

import copy
import json
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from mobisim.errors import ConfigError

DEFAULT_CONFIG: Dict[str, Any] = {
    'topology': {
        'fixture': 'paper-fig5',
        'path': None,
        'nodes': 100,
        'mean_degree': 4.0,
        'connection_radius_m': None,
        'connectivity': 'bridge',
        'seed': 1,
        'anchor_attach': None,
        'anchor_link_hops': 1,
        'cell_radius_m': 500.0,
    },
    'scheme': 'BOTH',
    'num_mns': 1,
    'speed_mph': 70.0,
    'mobility': {
        'convention': 'with_self_loop',
        'residence': 'exponential',
        'mu': None,
    },
    'traffic': {
        'bit_rate_bps': 1_000_000,
        'arrivals': 'poisson',
        'uplink': False,
    },
    'cn_nap': 'random',
    'duration_s': 1800.0,
    'warmup_s': 0.0,
    'attach_delay_s': 0.0,
    'replications': 20,
    'seed': 42,
    'latency': {
        'p': 1.0,
        'm': 1.0,
    },
    'catalog': {},
    'sweep': {
        'speeds_mph': [],
        'sizes': [],
    },
}

SCHEMES = ('PMIP', 'ICN', 'BOTH')
CONVENTIONS = ('with_self_loop', 'without_self_loop')
RESIDENCES = ('exponential', 'deterministic')
ARRIVALS = ('poisson', 'fluid')
CONNECTIVITY = ('retry', 'bridge')


def merge_configs(base: Dict, override: Dict) -> Dict:
    """
    Recursively merge two configuration dictionaries.

    Args:
        base: Base configuration
        override: Configuration to override with

    Returns:
        Merged configuration
    """
    result = base.copy()

    for key, value in override.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = merge_configs(result[key], value)
        else:
            result[key] = value

    return result


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _validate_speed(speed: Any) -> Optional[str]:
    if _is_number(speed):
        return None if speed > 0 else "speed_mph must be positive"
    if isinstance(speed, dict) and len(speed) == 1:
        if 'fixed' in speed:
            return _validate_speed(speed['fixed'])
        if 'uniform' in speed:
            bounds = speed['uniform']
            if (isinstance(bounds, (list, tuple)) and len(bounds) == 2
                    and all(_is_number(b) for b in bounds) and 0 < bounds[0] <= bounds[1]):
                return None
            return "speed_mph.uniform must be [low, high] with 0 < low <= high"
    return "speed_mph must be a number, {'fixed': mph} or {'uniform': [low, high]}"


def _validate_topology(topology: Any) -> Optional[str]:
    if not isinstance(topology, dict):
        return "topology must be an object"
    if topology.get('fixture') is None and topology.get('path') is None:
        nodes = topology.get('nodes')
        if not _is_int(nodes) or nodes < 1:
            return "topology.nodes must be a positive integer"
        radius = topology.get('connection_radius_m')
        if radius is not None and (not _is_number(radius) or radius <= 0):
            return "topology.connection_radius_m must be positive"
        if radius is None:
            degree = topology.get('mean_degree')
            if not _is_number(degree) or degree <= 0:
                return "topology.mean_degree must be positive"
        if topology.get('connectivity', 'bridge') not in CONNECTIVITY:
            return f"topology.connectivity must be one of {', '.join(CONNECTIVITY)}"
    attach = topology.get('anchor_attach')
    if attach is not None and (not _is_int(attach) or attach < 0):
        return "topology.anchor_attach must be a node id"
    hops = topology.get('anchor_link_hops', 1)
    if not _is_int(hops) or hops < 1:
        return "topology.anchor_link_hops must be an integer >= 1"
    if not _is_number(topology.get('cell_radius_m', 500.0)) or topology.get('cell_radius_m', 500.0) <= 0:
        return "topology.cell_radius_m must be positive"
    if not _is_int(topology.get('seed', 0)) or topology.get('seed', 0) < 0:
        return "topology.seed must be a non-negative integer"
    return None


def validate_config(config: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
    """
    Validate a complete scenario configuration.

    Args:
        config: Configuration dictionary (defaults already merged in)

    Returns:
        Tuple of (is_valid, error_message)
    """
    problem = _validate_topology(config.get('topology'))
    if problem:
        return False, problem

    if config.get('scheme') not in SCHEMES:
        return False, f"scheme must be one of {', '.join(SCHEMES)}"

    if not _is_int(config.get('num_mns')) or config['num_mns'] < 0:
        return False, "num_mns must be a non-negative integer"

    problem = _validate_speed(config.get('speed_mph'))
    if problem:
        return False, problem

    mobility = config.get('mobility', {})
    if mobility.get('convention') not in CONVENTIONS:
        return False, f"mobility.convention must be one of {', '.join(CONVENTIONS)}"
    if mobility.get('residence') not in RESIDENCES:
        return False, f"mobility.residence must be one of {', '.join(RESIDENCES)}"
    mu = mobility.get('mu')
    if mu is not None and (not _is_number(mu) or mu < 0):
        return False, "mobility.mu must be a non-negative number"

    traffic = config.get('traffic', {})
    if not _is_number(traffic.get('bit_rate_bps')) or traffic['bit_rate_bps'] < 0:
        return False, "traffic.bit_rate_bps must be a non-negative number"
    if traffic.get('arrivals') not in ARRIVALS:
        return False, f"traffic.arrivals must be one of {', '.join(ARRIVALS)}"
    if not isinstance(traffic.get('uplink'), bool):
        return False, "traffic.uplink must be true or false"

    cn_nap = config.get('cn_nap')
    if cn_nap != 'random' and (not _is_int(cn_nap) or cn_nap < 0):
        return False, "cn_nap must be a node id or 'random'"

    duration = config.get('duration_s')
    if not _is_number(duration) or duration <= 0:
        return False, "duration_s must be positive"
    warmup = config.get('warmup_s')
    if not _is_number(warmup) or not 0 <= warmup < duration:
        return False, "warmup_s must be in [0, duration_s)"
    delay = config.get('attach_delay_s')
    if not _is_number(delay) or delay < 0:
        return False, "attach_delay_s must be non-negative"

    if not _is_int(config.get('replications')) or config['replications'] < 1:
        return False, "replications must be an integer >= 1"
    if not _is_int(config.get('seed')) or config['seed'] < 0:
        return False, "seed must be a non-negative integer"

    latency = config.get('latency', {})
    for key in ('p', 'm'):
        if not _is_number(latency.get(key)) or latency[key] <= 0:
            return False, f"latency.{key} must be positive"

    catalog = config.get('catalog', {})
    if not isinstance(catalog, dict):
        return False, "catalog must be an object"
    for key, value in catalog.items():
        if not _is_int(value) or value <= 0:
            return False, f"catalog.{key} must be a positive integer"

    sweep = config.get('sweep', {})
    speeds = sweep.get('speeds_mph', [])
    if not isinstance(speeds, list) or not all(_is_number(s) and s > 0 for s in speeds):
        return False, "sweep.speeds_mph must be a list of positive numbers"
    sizes = sweep.get('sizes', [])
    if not isinstance(sizes, list) or not all(_is_int(n) and n >= 1 for n in sizes):
        return False, "sweep.sizes must be a list of positive integers"

    return True, None


class ConfigManager:
    """Manages scenario configuration."""

    def __init__(self, config_file: Optional[Path] = None, base: Optional[Dict[str, Any]] = None,
                 strict: bool = False):
        """
        Initialize the configuration manager.

        Args:
            config_file: Path to a JSON scenario file
            base: Settings merged over the defaults before the file (e.g. a preset)
            strict: Raise ConfigError on a missing or unreadable file instead of
                falling back to defaults
        """
        self.config_file = Path(config_file) if config_file is not None else None
        self.base = copy.deepcopy(base) if base else {}
        self.strict = strict
        self.config = self.load_config()

    def _defaults(self) -> Dict[str, Any]:
        return merge_configs(copy.deepcopy(DEFAULT_CONFIG), copy.deepcopy(self.base))

    def load_config(self) -> Dict[str, Any]:
        """
        Load configuration from file or create default.

        Returns:
            Configuration dictionary
        """
        if self.config_file is None:
            return self._defaults()
        if not self.config_file.exists():
            if self.strict:
                raise ConfigError(f"Config file not found: {self.config_file}")
            return self._defaults()
        try:
            with open(self.config_file, 'r') as f:
                loaded = json.load(f)
        except (json.JSONDecodeError, IOError) as exc:
            if self.strict:
                raise ConfigError(f"Cannot read config {self.config_file}: {exc}") from exc
            return self._defaults()
        if not isinstance(loaded, dict):
            if self.strict:
                raise ConfigError(f"Config {self.config_file} must hold a JSON object")
            return self._defaults()
        # Merge with defaults to handle missing keys
        return merge_configs(self._defaults(), loaded)

    def save_config(self, path: Optional[Path] = None) -> bool:
        """
        Save current configuration to file.

        Returns:
            True if successful, False otherwise
        """
        target = Path(path) if path is not None else self.config_file
        if target is None:
            return False
        try:
            with open(target, 'w') as f:
                json.dump(self.config, f, indent=2)
            return True
        except IOError:
            return False

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value.

        Args:
            key: Configuration key (supports dot notation, e.g., 'traffic.bit_rate_bps')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        value = self.config
        for k in key.split('.'):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """
        Set a configuration value.

        Args:
            key: Configuration key (supports dot notation)
            value: Value to set
        """
        keys = key.split('.')
        config = self.config
        for k in keys[:-1]:
            if k not in config or not isinstance(config[k], dict):
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """
        Apply command-line overrides on top of file and defaults.

        Args:
            overrides: Dotted key to value; None values are ignored
        """
        for key, value in overrides.items():
            if value is not None:
                self.set(key, value)

    def reset_to_defaults(self) -> None:
        """Reset configuration to the defaults and base settings."""
        self.config = self._defaults()

    def validate(self) -> Tuple[bool, Optional[str]]:
        return validate_config(self.config)

    def as_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.config)
