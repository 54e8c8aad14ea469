"""
Import functionality for mobisim.

This package reads topology JSON files, resolves reserved fixture names and
loads the scenario presets shipped with the package.
"""

from imports.topology_import import (
    import_topology_json,
    list_presets,
    load_preset,
    load_topology,
    topology_from_dict,
    validate_topology_data,
)

__all__ = [
    "import_topology_json",
    "list_presets",
    "load_preset",
    "load_topology",
    "topology_from_dict",
    "validate_topology_data",
]
