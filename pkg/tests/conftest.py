"""
Pytest configuration and shared fixtures.

This file contains pytest configuration and fixtures that are
available to all test modules.
"""

import json

import pytest

from mobisim.mobility import direction_matrix, stationary
from mobisim.topology import fixture_paper_topology, from_adjacency


@pytest.fixture
def paper_graph():
    """Nine access points with the anchor one hop above node 5."""
    return fixture_paper_topology()


@pytest.fixture
def paper_chain(paper_graph):
    """Direction matrix and stationary vector of the nine-AP network."""
    matrix = direction_matrix(paper_graph)
    return matrix, stationary(matrix)


@pytest.fixture
def star_graph():
    """Access nodes a=0 and b=1 both one hop from the center v=2; leaf s=3 hangs off v."""
    return from_adjacency([(0, 1), (0, 2), (1, 2), (3, 2)], anchor=2, access_nodes=[0, 1, 3],
                          name="star")


@pytest.fixture
def star_chain(star_graph):
    """Chain over the two mobile cells a and b only."""
    matrix = direction_matrix(star_graph, nodes=[0, 1])
    return matrix, stationary(matrix)


@pytest.fixture
def small_scenario():
    """A fast scenario dictionary on the nine-AP network."""
    return {
        'topology': {'fixture': 'paper-fig5'},
        'scheme': 'BOTH',
        'num_mns': 2,
        'speed_mph': 70,
        'cn_nap': 3,
        'duration_s': 300,
        'replications': 3,
        'seed': 7,
    }


@pytest.fixture
def scenario_file(tmp_path, small_scenario):
    """Write the small scenario to a JSON file."""
    path = tmp_path / "scenario.json"
    with open(path, "w") as f:
        json.dump(small_scenario, f)
    return path
