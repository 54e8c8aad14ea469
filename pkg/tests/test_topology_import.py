"""
Tests for topology_import module.
"""

import json

import pytest

from export.result_export import write_topology_json
from imports.topology_import import (
    import_topology_json,
    list_presets,
    load_preset,
    load_topology,
    topology_from_dict,
    validate_topology_data,
)
from mobisim.errors import ConfigError, UnknownPresetError
from utils.config_manager import DEFAULT_CONFIG, merge_configs, validate_config

TRIANGLE = {'nodes': 3, 'edges': [[0, 1], [1, 2], [0, 2]], 'anchor': 2, 'access_nodes': [0, 1]}


@pytest.fixture
def topology_file(tmp_path):
    path = tmp_path / "triangle.json"
    with open(path, 'w') as f:
        json.dump(TRIANGLE, f)
    return path


def test_validate_topology_data_valid():
    """Test a well-formed document passes."""
    assert validate_topology_data(TRIANGLE) == (True, None)


@pytest.mark.parametrize("data, message", [
    ([], "JSON object"),
    ({'nodes': 3, 'edges': []}, "anchor"),
    ({'nodes': 0, 'edges': [], 'anchor': 0}, "positive"),
    ({'nodes': 3, 'edges': [[0]], 'anchor': 0}, "pairs"),
    ({'nodes': 2, 'edges': [[0, 5]], 'anchor': 0}, "outside"),
    ({'nodes': 2, 'edges': [[0, 1]], 'anchor': 0, 'positions': [[0, 0]]}, "positions"),
])
def test_validate_topology_data_invalid(data, message):
    """Test malformed documents are reported."""
    is_valid, error = validate_topology_data(data)
    assert not is_valid
    assert message in error


def test_topology_from_dict():
    """Test the graph keeps the declared anchor and access nodes."""
    graph = topology_from_dict(TRIANGLE)
    assert graph.node_count == 3
    assert graph.anchor == 2
    assert list(graph.access_nodes) == [0, 1]


def test_topology_from_dict_node_count_mismatch():
    """Test declared nodes must match the edges."""
    with pytest.raises(ConfigError):
        topology_from_dict({'nodes': 4, 'edges': [[0, 1], [1, 2]], 'anchor': 2})
    with pytest.raises(ConfigError):
        topology_from_dict({'nodes': 1, 'edges': [], 'anchor': 0})


def test_import_topology_json(topology_file):
    """Test importing a topology file."""
    graph = import_topology_json(topology_file)
    assert graph is not None
    assert graph.node_count == 3


def test_import_topology_json_unreadable(tmp_path):
    """Test missing and corrupt files give None."""
    assert import_topology_json(tmp_path / "missing.json") is None
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text("{not json")
    assert import_topology_json(corrupt) is None


def test_export_then_import(tmp_path, paper_graph):
    """Test an exported fixture imports to the same network."""
    path = tmp_path / "nine_ap.json"
    assert write_topology_json(paper_graph, path)
    graph = import_topology_json(path)
    assert graph.edges == paper_graph.edges
    assert graph.anchor == paper_graph.anchor
    assert graph.access_nodes == paper_graph.access_nodes


def test_load_topology(topology_file):
    """Test fixture names and files both resolve."""
    assert load_topology("paper-fig5").anchor == 9
    assert load_topology(str(topology_file)).anchor == 2
    with pytest.raises(UnknownPresetError):
        load_topology("not-a-fixture")


def test_presets_shipped():
    """Test every preset is listed and validates over the defaults."""
    names = list_presets()
    for name in ('paper-fig5', 'fig9', 'fig11a', 'fig11b', 'fig12', 'fig13', 'sizes'):
        assert name in names
    for name in names:
        preset = load_preset(name)
        assert preset['description']
        assert validate_config(merge_configs(DEFAULT_CONFIG, preset)) == (True, None)


def test_preset_contents():
    """Test the nine-AP preset places the CN at node 3."""
    preset = load_preset("paper-fig5")
    assert preset['cn_nap'] == 3
    assert preset['topology']['fixture'] == 'paper-fig5'
    assert load_preset("fig12")['sweep']['speeds_mph'] == [3, 10, 30, 50, 70]


def test_random_presets_use_mean_degree_four():
    """Test the random-network experiments target mean degree four with bridging."""
    for name in ("fig11a", "fig11b", "fig12", "fig13"):
        topology = load_preset(name)["topology"]
        assert topology["mean_degree"] == 4.0
        assert topology["connectivity"] == "bridge"


def test_sizes_preset_settings():
    """Test the size sweep runs ten MNs for five 300 s replications at 100 and 400 nodes."""
    preset = load_preset("sizes")
    assert preset["sweep"]["sizes"] == [100, 400]
    assert (preset["num_mns"], preset["duration_s"], preset["replications"]) == (10, 300, 5)
    assert preset["topology"]["anchor_link_hops"] == 6


def test_unknown_preset():
    """Test an unknown preset name is refused."""
    with pytest.raises(UnknownPresetError):
        load_preset("fig99")
