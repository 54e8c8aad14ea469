"""
Tests for config_manager module.
"""

import copy
import json

import pytest

from mobisim.errors import ConfigError
from utils.config_manager import DEFAULT_CONFIG, ConfigManager, merge_configs, validate_config


@pytest.fixture
def temp_config_file(tmp_path):
    """Create a temporary config file path."""
    config_file = tmp_path / "test_config.json"
    # Ensure it doesn't exist initially
    if config_file.exists():
        config_file.unlink()
    return config_file


@pytest.fixture
def valid_config():
    return copy.deepcopy(DEFAULT_CONFIG)


def test_config_manager_default_init(temp_config_file):
    """Test initializing ConfigManager with defaults."""
    manager = ConfigManager(temp_config_file)
    assert manager.config == DEFAULT_CONFIG


def test_default_config_is_valid():
    """Test the shipped defaults pass validation."""
    assert validate_config(DEFAULT_CONFIG) == (True, None)


def test_missing_file_strict(temp_config_file):
    """Test strict mode refuses a missing file."""
    with pytest.raises(ConfigError):
        ConfigManager(temp_config_file, strict=True)


def test_save_and_load_config(temp_config_file):
    """Test saving and loading configuration."""
    manager = ConfigManager(temp_config_file)
    manager.set('traffic.bit_rate_bps', 2_000_000)
    assert manager.save_config() is True

    # Load it again
    manager2 = ConfigManager(temp_config_file)
    assert manager2.get('traffic.bit_rate_bps') == 2_000_000


def test_get_nested_key(temp_config_file):
    """Test getting a nested configuration key."""
    manager = ConfigManager(temp_config_file)
    assert manager.get('latency.p') == 1.0
    assert manager.get('topology.fixture') == 'paper-fig5'


def test_get_nonexistent_key(temp_config_file):
    """Test getting a non-existent key returns default."""
    manager = ConfigManager(temp_config_file)
    assert manager.get('nonexistent.key', 'default_value') == 'default_value'


def test_set_new_nested_key(temp_config_file):
    """Test setting a new nested key."""
    manager = ConfigManager(temp_config_file)
    manager.set('new.nested.key', 'value')
    assert manager.get('new.nested.key') == 'value'


def test_apply_overrides_skips_none(temp_config_file):
    """Test None overrides keep the configured value."""
    manager = ConfigManager(temp_config_file)
    manager.apply_overrides({'seed': 7, 'replications': None, 'traffic.uplink': True})
    assert manager.get('seed') == 7
    assert manager.get('replications') == 20
    assert manager.get('traffic.uplink') is True


def test_base_layer_between_defaults_and_file(temp_config_file):
    """Test preset settings sit under the file and over the defaults."""
    with open(temp_config_file, 'w') as f:
        json.dump({'num_mns': 5}, f)
    manager = ConfigManager(temp_config_file, base={'num_mns': 50, 'speed_mph': 30})
    assert manager.get('num_mns') == 5
    assert manager.get('speed_mph') == 30
    assert manager.get('duration_s') == 1800.0


def test_reset_to_defaults(temp_config_file):
    """Test resetting configuration to defaults."""
    manager = ConfigManager(temp_config_file)
    manager.set('seed', 99)
    manager.reset_to_defaults()
    assert manager.get('seed') == 42


def test_load_config_with_invalid_json(temp_config_file):
    """Test loading config with invalid JSON."""
    with open(temp_config_file, 'w') as f:
        f.write("invalid json {")

    assert ConfigManager(temp_config_file).config == DEFAULT_CONFIG
    with pytest.raises(ConfigError):
        ConfigManager(temp_config_file, strict=True)


def test_load_config_rejects_non_object(temp_config_file):
    """Test a JSON array is not a scenario."""
    with open(temp_config_file, 'w') as f:
        json.dump([1, 2], f)
    with pytest.raises(ConfigError):
        ConfigManager(temp_config_file, strict=True)


def test_load_config_merges_with_defaults(temp_config_file):
    """Test loading partial config merges with defaults."""
    with open(temp_config_file, 'w') as f:
        json.dump({'traffic': {'arrivals': 'fluid'}}, f)

    manager = ConfigManager(temp_config_file)
    assert manager.get('traffic.arrivals') == 'fluid'
    assert manager.get('traffic.bit_rate_bps') == 1_000_000  # Should have default


def test_save_config_failure(tmp_path):
    """Test save config reports failure for an unwritable path."""
    manager = ConfigManager(tmp_path / "nonexistent_dir" / "config.json")
    assert manager.save_config() is False


def test_merge_configs_deep():
    """Test deep merging of configurations."""
    base = {'a': {'b': {'c': 1}}, 'd': 2}
    override = {'a': {'b': {'e': 3}}}
    result = merge_configs(base, override)

    assert result['a']['b']['c'] == 1
    assert result['a']['b']['e'] == 3
    assert result['d'] == 2


def test_validate_speed_forms(valid_config):
    """Test fixed, wrapped and uniform speeds are accepted."""
    for speed in (70, {'fixed': 3.5}, {'uniform': [3, 70]}):
        valid_config['speed_mph'] = speed
        assert validate_config(valid_config)[0]


@pytest.mark.parametrize("key, value, message", [
    ('scheme', 'MIPv6', 'scheme'),
    ('num_mns', -1, 'num_mns'),
    ('speed_mph', 0, 'speed_mph'),
    ('speed_mph', {'uniform': [70, 3]}, 'uniform'),
    ('cn_nap', 'anywhere', 'cn_nap'),
    ('duration_s', 0, 'duration_s'),
    ('warmup_s', 1800.0, 'warmup_s'),
    ('replications', 0, 'replications'),
    ('seed', -1, 'seed'),
    ('attach_delay_s', -0.5, 'attach_delay_s'),
])
def test_validate_rejects(valid_config, key, value, message):
    """Test invalid top-level values are reported by name."""
    valid_config[key] = value
    is_valid, error = validate_config(valid_config)
    assert not is_valid
    assert message in error


def test_validate_nested(valid_config):
    """Test nested sections are validated."""
    bad = merge_configs(valid_config, {'traffic': {'arrivals': 'bursty'}})
    assert validate_config(bad)[1].startswith('traffic.arrivals')
    bad = merge_configs(valid_config, {'mobility': {'mu': -0.1}})
    assert validate_config(bad)[1].startswith('mobility.mu')
    bad = merge_configs(valid_config, {'latency': {'m': 0}})
    assert validate_config(bad)[1].startswith('latency.m')
    bad = merge_configs(valid_config, {'catalog': {'L_u': 0}})
    assert validate_config(bad)[1].startswith('catalog.L_u')
    bad = merge_configs(valid_config, {'sweep': {'sizes': [100, 0]}})
    assert validate_config(bad)[1].startswith('sweep.sizes')


def test_validate_random_topology(valid_config):
    """Test random networks need a node count and a degree or radius."""
    topo = {'fixture': None, 'nodes': 0}
    assert 'topology.nodes' in validate_config(merge_configs(valid_config, {'topology': topo}))[1]
    topo = {'fixture': None, 'nodes': 50, 'mean_degree': None, 'connection_radius_m': 900.0}
    assert validate_config(merge_configs(valid_config, {'topology': topo}))[0]
    topo = {'fixture': None, 'anchor_link_hops': 0}
    assert 'anchor_link_hops' in validate_config(merge_configs(valid_config, {'topology': topo}))[1]


def test_validate_connectivity_mode(valid_config):
    """Test random networks accept retry or bridge connectivity only."""
    for mode in ('retry', 'bridge'):
        topo = {'fixture': None, 'nodes': 50, 'connectivity': mode}
        assert validate_config(merge_configs(valid_config, {'topology': topo}))[0]
    topo = {'fixture': None, 'nodes': 50, 'connectivity': 'glue'}
    is_valid, error = validate_config(merge_configs(valid_config, {'topology': topo}))
    assert not is_valid
    assert error == "topology.connectivity must be one of retry, bridge"
