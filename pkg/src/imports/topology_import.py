"""
Topology and preset import module.
Reads topology JSON files, reserved fixture names and shipped scenario presets.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import mobisim
from mobisim.errors import ConfigError, UnknownPresetError
from mobisim.topology import FIXTURES, TopologyGraph, fixture, from_adjacency

PRESET_DIR = Path(mobisim.__file__).parent / "presets"


def validate_topology_data(data: Any) -> Tuple[bool, Optional[str]]:
    """
    Check the shape of a topology JSON document.

    Args:
        data: Parsed JSON

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not isinstance(data, dict):
        return False, "Topology must be a JSON object"
    for key in ('nodes', 'edges', 'anchor'):
        if key not in data:
            return False, f"Missing field '{key}'"
    if not isinstance(data['nodes'], int) or data['nodes'] < 1:
        return False, "'nodes' must be a positive integer"
    edges = data['edges']
    if not isinstance(edges, list) or not all(
        isinstance(e, (list, tuple)) and len(e) == 2 and all(isinstance(v, int) for v in e)
        for e in edges
    ):
        return False, "'edges' must be a list of [u, v] integer pairs"
    if any(not 0 <= v < data['nodes'] for e in edges for v in e):
        return False, "Edge endpoint outside 0..nodes-1"
    positions = data.get('positions')
    if positions is not None and len(positions) != data['nodes']:
        return False, "'positions' must list one coordinate pair per node"
    return True, None


def topology_from_dict(data: Dict[str, Any]) -> TopologyGraph:
    """
    Build a graph from its JSON form.

    Raises:
        ConfigError: If the document is malformed
    """
    is_valid, error = validate_topology_data(data)
    if not is_valid:
        raise ConfigError(f"Invalid topology: {error}")
    edges = [tuple(e) for e in data['edges']]
    if data['nodes'] == 1 or not edges:
        raise ConfigError("Invalid topology: at least one edge is required")
    graph = from_adjacency(
        edges,
        anchor=data['anchor'],
        access_nodes=data.get('access_nodes'),
        cell_radius=data.get('cell_radius_m', 500.0),
        positions=data.get('positions'),
        name=data.get('name', ''),
    )
    if graph.node_count != data['nodes']:
        raise ConfigError(
            f"Invalid topology: {data['nodes']} nodes declared, edges cover {graph.node_count}"
        )
    return graph


def import_topology_json(filepath: Union[str, Path]) -> Optional[TopologyGraph]:
    """
    Import a topology from a JSON file.

    Args:
        filepath: Path to input file

    Returns:
        TopologyGraph if the file could be read, None otherwise
    """
    try:
        with open(filepath, 'r') as f:
            data = json.load(f)
    except (IOError, OSError, json.JSONDecodeError):
        return None
    return topology_from_dict(data)


def load_topology(source: Union[str, Path]) -> TopologyGraph:
    """
    Resolve a reserved fixture name or a topology JSON path.

    Raises:
        UnknownPresetError: If ``source`` is neither a fixture nor a readable file
    """
    if str(source) in FIXTURES:
        return fixture(str(source))
    graph = import_topology_json(source)
    if graph is None:
        raise UnknownPresetError(f"'{source}' is neither a fixture name nor a readable topology file")
    return graph


def list_presets() -> List[str]:
    """Names of the scenario presets shipped with the package."""
    return sorted(p.stem for p in PRESET_DIR.glob("*.json"))


def load_preset(name: str) -> Dict[str, Any]:
    """
    Load a shipped scenario preset.

    Raises:
        UnknownPresetError: If no preset has this name
    """
    path = PRESET_DIR / f"{name}.json"
    if not path.is_file():
        raise UnknownPresetError(f"Unknown preset '{name}'. Available: {', '.join(list_presets())}")
    with open(path, 'r') as f:
        return json.load(f)
