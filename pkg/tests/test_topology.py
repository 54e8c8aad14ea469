"""
Tests for topology module.
"""

import numpy as np
import pytest

from mobisim.errors import (
    ConnectivityRetriesExhaustedError,
    DisconnectedGraphError,
    InvalidAnchorError,
    SelfLoopEdgeError,
    UnknownPresetError,
)
from mobisim.mobility import direction_matrix
from mobisim.topology import (
    FIXTURES,
    Connectivity,
    central_node,
    default_area_side,
    fig4_shape,
    fixture,
    fixture_paper_topology,
    from_adjacency,
    hop_counts,
    radius_for_mean_degree,
    random_geometric,
)

PAPER_HOPS_TO_ANCHOR = [3, 2, 3, 3, 2, 1, 2, 2, 2]


def test_paper_fixture_shape(paper_graph):
    """Test the nine-AP fixture has its dedicated anchor above node 5."""
    assert paper_graph.node_count == 10
    assert paper_graph.anchor == 9
    assert paper_graph.access_nodes == tuple(range(9))
    assert paper_graph.neighbors(9) == frozenset({5})
    assert paper_graph.access_degrees == [3, 3, 2, 3, 4, 5, 3, 4, 3]


def test_paper_fixture_hops_to_anchor(paper_graph):
    """Test hop counts from every access point to the anchor."""
    hops = hop_counts(paper_graph)
    assert list(hops.to_anchor(paper_graph.access_nodes, paper_graph.anchor)) == PAPER_HOPS_TO_ANCHOR


def test_anchor_link_hops_lengthens_paths():
    """Test a longer anchor uplink adds the same hops to every access point."""
    graph = fixture_paper_topology(anchor_link_hops=3)
    hops = hop_counts(graph)
    assert graph.node_count == 12
    expected = [h + 2 for h in PAPER_HOPS_TO_ANCHOR]
    assert list(hops.to_anchor(range(9), graph.anchor)) == expected


def test_paper_fixture_rejects_bad_attachment():
    """Test the anchor must hang off one of the nine access points."""
    with pytest.raises(InvalidAnchorError):
        fixture_paper_topology(anchor_attach=9)


def test_hop_matrix_symmetric_with_zero_diagonal(paper_graph):
    """Test hop counts are symmetric and zero on the diagonal."""
    hops = hop_counts(paper_graph).hops
    assert np.array_equal(hops, hops.T)
    assert np.all(np.diag(hops) == 0)


def test_hop_counts_are_cached(paper_graph):
    """Test hop counts are computed once per graph."""
    assert hop_counts(paper_graph) is hop_counts(paper_graph)


def test_single_edge_graph():
    """Test the smallest graph has one hop between its nodes."""
    graph = from_adjacency([(0, 1)], anchor=1)
    assert hop_counts(graph)[0, 1] == 1
    assert graph.access_nodes == (0,)


def test_from_adjacency_rejects_self_loop():
    """Test a self edge is refused."""
    with pytest.raises(SelfLoopEdgeError):
        from_adjacency([(0, 1), (1, 1)], anchor=0)


def test_from_adjacency_rejects_disconnected():
    """Test a disconnected edge list is refused."""
    with pytest.raises(DisconnectedGraphError):
        from_adjacency([(0, 1), (2, 3)], anchor=0)


def test_from_adjacency_rejects_bad_anchor():
    """Test the anchor must be a node and cannot be an access node."""
    with pytest.raises(InvalidAnchorError):
        from_adjacency([(0, 1)], anchor=5)
    with pytest.raises(InvalidAnchorError):
        from_adjacency([(0, 1), (1, 2)], anchor=1, access_nodes=[0, 1])


def test_duplicate_edges_merge():
    """Test repeated and reversed edges collapse to one link."""
    graph = from_adjacency([(0, 1), (1, 0), (0, 1), (1, 2)], anchor=2)
    assert graph.edges == [(0, 1), (1, 2)]


def test_to_dict_round_trip(paper_graph):
    """Test the JSON form rebuilds the same graph."""
    data = paper_graph.to_dict()
    rebuilt = from_adjacency(
        [tuple(e) for e in data['edges']],
        anchor=data['anchor'],
        access_nodes=data['access_nodes'],
        name=data['name'],
    )
    assert rebuilt.edges == paper_graph.edges
    assert rebuilt.access_nodes == paper_graph.access_nodes


def test_fig4_shapes():
    """Test both route shapes give the motivating direct and anchored hop counts."""
    a = fig4_shape("a")
    hops = hop_counts(a.graph)
    assert hops[a.mn_nap, a.cn_nap] == 2
    assert hops[a.cn_nap, a.graph.anchor] + hops[a.graph.anchor, a.mn_nap] == 4

    b = fig4_shape("b")
    hops = hop_counts(b.graph)
    assert hops[b.mn_nap, b.cn_nap] == 1
    assert hops[b.cn_nap, b.graph.anchor] + hops[b.graph.anchor, b.mn_nap] == 3


def test_fig4_unknown_variant():
    """Test an unknown shape name is refused."""
    with pytest.raises(UnknownPresetError):
        fig4_shape("c")


def test_fixture_lookup():
    """Test every reserved name builds and unknown names fail."""
    for name in FIXTURES:
        assert fixture(name).node_count >= 4
    with pytest.raises(UnknownPresetError):
        fixture("no-such-topology")


def test_central_node_of_path():
    """Test the middle of a path is its central node."""
    graph = from_adjacency([(0, 1), (1, 2), (2, 3), (3, 4)], anchor=4)
    assert central_node(graph) == 2


def test_central_node_tie_goes_to_lowest_id():
    """Test equally central nodes resolve to the lowest id."""
    graph = from_adjacency([(0, 1), (1, 2), (2, 3)], anchor=3)
    assert central_node(graph) == 1


def test_central_node_invariant_under_relabeling():
    """Test relabeling a graph moves the central node with it."""
    graph = from_adjacency([(0, 1), (1, 2), (2, 3), (3, 4), (2, 5)], anchor=5)
    perm = [4, 0, 3, 1, 5, 2]
    relabeled = graph.relabeled(perm)
    assert central_node(relabeled) == perm[central_node(graph)]


def test_random_geometric_is_deterministic():
    """Test the same seed yields the same graph."""
    side = default_area_side(60)
    radius = radius_for_mean_degree(60, 8.0, side)
    first = random_geometric(60, radius, seed=3)
    second = random_geometric(60, radius, seed=3)
    assert first.edges == second.edges
    assert first.positions == second.positions


def test_random_geometric_attaches_anchor_to_center():
    """Test the anchor hangs off the central access node."""
    side = default_area_side(60)
    graph = random_geometric(60, radius_for_mean_degree(60, 8.0, side), seed=5)
    assert graph.node_count == 61
    assert graph.anchor == 60
    assert graph.access_nodes == tuple(range(60))
    (attached,) = graph.neighbors(graph.anchor)
    assert attached == central_node(graph, graph.access_nodes)


def test_random_geometric_anchor_as_central_node():
    """Test without a dedicated anchor the central node becomes the anchor."""
    side = default_area_side(40)
    graph = random_geometric(40, radius_for_mean_degree(40, 8.0, side), seed=2, attach_anchor=False)
    assert graph.node_count == 40
    assert graph.anchor not in graph.access_nodes


def test_radius_matches_mean_degree_with_border_loss():
    """Test the radius rule gives the requested mean degree including border nodes."""
    n = 100
    side = default_area_side(n)
    radius = radius_for_mean_degree(n, 4.0, side)
    assert radius > np.sqrt(4.0 * side ** 2 / (np.pi * (n - 1)))
    rng = np.random.default_rng(0)
    degrees = []
    for _ in range(40):
        xy = rng.uniform(0.0, side, size=(n, 2))
        gaps = np.linalg.norm(xy[:, None, :] - xy[None, :, :], axis=-1)
        degrees.append(((gaps <= radius).sum() - n) / n)
    assert np.mean(degrees) == pytest.approx(4.0, abs=0.3)


def test_radius_for_unreachable_degree_is_diagonal():
    """Test asking for more neighbors than nodes returns the area diagonal."""
    assert radius_for_mean_degree(5, 10.0, 100.0) == pytest.approx(np.hypot(100.0, 100.0))
    assert radius_for_mean_degree(1, 4.0, 100.0) == pytest.approx(np.hypot(100.0, 100.0))


def test_random_geometric_mean_degree_close_to_target():
    """Test connected draws land near the requested mean degree."""
    n = 200
    side = default_area_side(n)
    graph = random_geometric(n, radius_for_mean_degree(n, 8.0, side), seed=1)
    assert 7.0 < np.mean(graph.access_degrees) < 9.3


def test_random_geometric_sparse_retry_accepted():
    """Test a mean degree of 4 still finds a connected 30-node draw by retrying."""
    side = default_area_side(30)
    graph = random_geometric(30, radius_for_mean_degree(30, 4.0, side), seed=0)
    assert graph.node_count == 31
    hop_counts(graph)


def test_random_geometric_bridge_hundred_nodes_degree_four():
    """Test bridging accepts 100 nodes at mean degree 4 with every node reachable."""
    n = 100
    side = default_area_side(n)
    graph = random_geometric(n, radius_for_mean_degree(n, 4.0, side), seed=11,
                             connectivity=Connectivity.BRIDGE)
    degrees = graph.access_degrees
    assert min(degrees) >= 1
    assert 3.3 < np.mean(degrees) < 5.0
    assert (hop_counts(graph).hops >= 0).all()
    direction_matrix(graph)


def test_bridge_links_components_with_spanning_tree():
    """Test a radius too small for any link is bridged into a tree."""
    graph = random_geometric(30, 1.0, seed=0, connectivity="bridge")
    # 29 tree links plus the anchor link
    assert len(graph.edges) == 30
    assert graph.node_count == 31


def test_bridge_is_deterministic():
    """Test bridged draws repeat exactly for the same seed."""
    side = default_area_side(80)
    radius = radius_for_mean_degree(80, 4.0, side)
    first = random_geometric(80, radius, seed=4, connectivity=Connectivity.BRIDGE)
    second = random_geometric(80, radius, seed=4, connectivity=Connectivity.BRIDGE)
    assert first.edges == second.edges


@pytest.mark.parametrize("connectivity", [Connectivity.RETRY, Connectivity.BRIDGE])
def test_central_anchor_keeps_access_nodes_connected(connectivity):
    """Test removing the central node as anchor never splits the access network."""
    side = default_area_side(30)
    radius = radius_for_mean_degree(30, 8.0, side)
    for seed in range(40):
        graph = random_geometric(30, radius, seed=seed, attach_anchor=False,
                                 connectivity=connectivity)
        matrix = direction_matrix(graph)
        assert len(matrix) == 29


def test_random_geometric_gives_up():
    """Test an impossibly small radius exhausts the connectivity retries."""
    with pytest.raises(ConnectivityRetriesExhaustedError):
        random_geometric(30, 1.0, seed=0, max_attempts=3)
