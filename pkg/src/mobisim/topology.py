"""
Access-network topology module.
Builds and queries the graphs the mobility model walks on: the nine-AP reference
network, the two delivery-route shapes, random geometric
networks, all-pairs hop counts and anchor placement.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import brentq

from mobisim.errors import (
    ConnectivityRetriesExhaustedError,
    DisconnectedGraphError,
    InvalidAnchorError,
    SelfLoopEdgeError,
    UnknownPresetError,
)

logger = logging.getLogger(__name__)

NodeId = int
Edge = Tuple[NodeId, NodeId]

DEFAULT_CELL_RADIUS_M = 500.0
MAX_CONNECTIVITY_ATTEMPTS = 100


class Connectivity(str, Enum):
    """How a random geometric draw is made connected."""

    RETRY = "retry"
    BRIDGE = "bridge"


# AP1..AP9 as 0..8; read off the nonzero off-diagonal entries of the
# direction probability matrix of the nine-AP reference network.
PAPER_FIXTURE_EDGES: Tuple[Edge, ...] = (
    (0, 1), (0, 3), (0, 4),
    (1, 2), (1, 5),
    (2, 6),
    (3, 4), (3, 7),
    (4, 5), (4, 7),
    (5, 6), (5, 7), (5, 8),
    (6, 8),
    (7, 8),
)
PAPER_FIXTURE_ANCHOR_ATTACH = 5  # AP6, the maximum-degree access point
PAPER_FIXTURE_CN_NAP = 3  # AP4


@dataclass(frozen=True)
class HopMatrix:
    """All-pairs shortest-path hop counts."""

    hops: np.ndarray

    def __getitem__(self, pair: Tuple[NodeId, NodeId]) -> int:
        u, v = pair
        return int(self.hops[u, v])

    def __len__(self) -> int:
        return self.hops.shape[0]

    def to_anchor(self, nodes: Sequence[NodeId], anchor: NodeId) -> np.ndarray:
        """Hop counts from each of ``nodes`` to ``anchor`` as an int vector."""
        return self.hops[list(nodes), anchor].astype(np.int64)


@dataclass(frozen=True)
class TopologyGraph:
    """
    Undirected access-network graph.

    ``access_nodes`` are the MAGs/NAPs a mobile node may attach to; the anchor
    (LMA, and RV/TM co-located with it) is never an access node.
    """

    node_count: int
    adjacency: Tuple[FrozenSet[NodeId], ...]
    anchor: NodeId
    access_nodes: Tuple[NodeId, ...]
    cell_radius: float = DEFAULT_CELL_RADIUS_M
    positions: Optional[Tuple[Tuple[float, float], ...]] = None
    name: str = ""
    _hop_cache: List[HopMatrix] = field(
        default_factory=list, init=False, compare=False, repr=False, hash=False
    )

    @property
    def degrees(self) -> List[int]:
        return [len(nbrs) for nbrs in self.adjacency]

    @property
    def access_degrees(self) -> List[int]:
        """Degrees within the subgraph induced by the access nodes."""
        access = set(self.access_nodes)
        return [len(self.adjacency[k] & access) for k in self.access_nodes]

    @property
    def edges(self) -> List[Edge]:
        return sorted(
            (u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v
        )

    def neighbors(self, node: NodeId) -> FrozenSet[NodeId]:
        return self.adjacency[node]

    def is_access(self, node: NodeId) -> bool:
        return node in self.access_nodes

    def has_node(self, node: NodeId) -> bool:
        return isinstance(node, (int, np.integer)) and 0 <= node < self.node_count

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(self.edges)
        return g

    def to_dict(self) -> Dict:
        data = {
            'nodes': self.node_count,
            'edges': [list(e) for e in self.edges],
            'anchor': self.anchor,
            'access_nodes': list(self.access_nodes),
            'cell_radius_m': self.cell_radius,
        }
        if self.positions is not None:
            data['positions'] = [list(p) for p in self.positions]
        if self.name:
            data['name'] = self.name
        return data

    def relabeled(self, perm: Sequence[NodeId]) -> 'TopologyGraph':
        """Return a copy where node ``k`` becomes ``perm[k]``."""
        edges = [(perm[u], perm[v]) for u, v in self.edges]
        positions = None
        if self.positions is not None:
            moved: List[Tuple[float, float]] = [(0.0, 0.0)] * self.node_count
            for k, pos in enumerate(self.positions):
                moved[perm[k]] = pos
            positions = tuple(moved)
        return _build(
            self.node_count,
            edges,
            perm[self.anchor],
            access_nodes=[perm[k] for k in self.access_nodes],
            cell_radius=self.cell_radius,
            positions=positions,
            name=self.name,
        )


def _build(node_count: int, edges: Iterable[Edge], anchor: NodeId,
           access_nodes: Optional[Iterable[NodeId]] = None,
           cell_radius: float = DEFAULT_CELL_RADIUS_M,
           positions: Optional[Sequence[Sequence[float]]] = None,
           name: str = "") -> TopologyGraph:
    adjacency: List[set] = [set() for _ in range(node_count)]
    for u, v in edges:
        if u == v:
            raise SelfLoopEdgeError(f"Self edge at node {u}")
        if not (0 <= u < node_count and 0 <= v < node_count):
            raise ValueError(f"Edge ({u}, {v}) outside node range 0..{node_count - 1}")
        # duplicates merge into the set
        adjacency[u].add(v)
        adjacency[v].add(u)

    if not (isinstance(anchor, (int, np.integer)) and 0 <= anchor < node_count):
        raise InvalidAnchorError(f"Anchor {anchor} is not a node of a {node_count}-node graph")

    if access_nodes is None:
        access = tuple(k for k in range(node_count) if k != anchor)
    else:
        access = tuple(sorted(set(int(k) for k in access_nodes)))
        if anchor in access:
            raise InvalidAnchorError(f"Anchor {anchor} cannot also be an access node")

    graph = TopologyGraph(
        node_count=node_count,
        adjacency=tuple(frozenset(nbrs) for nbrs in adjacency),
        anchor=int(anchor),
        access_nodes=access,
        cell_radius=float(cell_radius),
        positions=None if positions is None else tuple((float(p[0]), float(p[1])) for p in positions),
        name=name,
    )
    if node_count > 1 and not nx.is_connected(graph.to_networkx()):
        raise DisconnectedGraphError(f"Graph '{name or 'unnamed'}' is not connected")
    return graph


def from_adjacency(edge_list: Sequence[Edge], anchor: NodeId,
                   access_nodes: Optional[Iterable[NodeId]] = None,
                   cell_radius: float = DEFAULT_CELL_RADIUS_M,
                   positions: Optional[Sequence[Sequence[float]]] = None,
                   name: str = "") -> TopologyGraph:
    """
    Build a graph from an edge list.

    Args:
        edge_list: Node id pairs; ids must form the dense range 0..K-1
        anchor: Node hosting the LMA and the RV/TM
        access_nodes: Nodes MNs may attach to (default: every node but the anchor)
        cell_radius: Coverage radius of every access point in meters
        positions: Optional 2-D coordinates in meters
        name: Label used in logs and exports

    Returns:
        The connected, symmetric TopologyGraph
    """
    if not edge_list:
        raise ValueError("Edge list must not be empty")
    node_count = max(max(u, v) for u, v in edge_list) + 1
    graph = _build(node_count, edge_list, anchor, access_nodes, cell_radius, positions, name)
    logger.debug("Built graph %s: %d nodes, %d edges", name or "<adjacency>",
                 graph.node_count, len(graph.edges))
    return graph


def _with_anchor_chain(edges: List[Edge], node_count: int, attach_to: NodeId,
                       link_hops: int) -> Tuple[List[Edge], int, NodeId]:
    """Append ``link_hops`` core links from ``attach_to`` up to a new anchor node."""
    if link_hops < 1:
        raise InvalidAnchorError("anchor_link_hops must be at least 1")
    edges = list(edges)
    previous = attach_to
    for _ in range(link_hops):
        edges.append((previous, node_count))
        previous = node_count
        node_count += 1
    return edges, node_count, previous


def fixture_paper_topology(anchor_attach: NodeId = PAPER_FIXTURE_ANCHOR_ATTACH,
                           anchor_link_hops: int = 1) -> TopologyGraph:
    """
    The nine-AP reference network plus a dedicated anchor node.

    Args:
        anchor_attach: Access point the anchor hangs off (default AP6)
        anchor_link_hops: Core hops between that access point and the anchor

    Returns:
        TopologyGraph with access nodes 0..8 and the anchor as the last node
    """
    if not 0 <= anchor_attach < 9:
        raise InvalidAnchorError(f"Anchor attachment {anchor_attach} is not one of AP1..AP9")
    edges, node_count, anchor = _with_anchor_chain(
        list(PAPER_FIXTURE_EDGES), 9, anchor_attach, anchor_link_hops
    )
    return _build(node_count, edges, anchor, access_nodes=range(9), name="paper-fig5")


@dataclass(frozen=True)
class RouteShape:
    graph: TopologyGraph
    mn_nap: NodeId
    cn_nap: NodeId


def fig4_shape(variant: str) -> RouteShape:
    """
    The two delivery-route motivation topologies.

    Variant "a": MN and CN two hops apart, anchor off the middle router, so
    anchored delivery crosses four hops. Variant "b" adds two links to the same
    setup: one hop direct versus three anchored.
    """
    if variant == "a":
        edges = [(0, 1), (1, 2), (1, 3)]
    elif variant == "b":
        edges = [(0, 1), (1, 2), (1, 3), (0, 2), (0, 3)]
    else:
        raise UnknownPresetError(f"Unknown route shape '{variant}'")
    graph = _build(4, edges, 3, access_nodes=[0, 1, 2], name=f"fig4{variant}")
    return RouteShape(graph=graph, mn_nap=2, cn_nap=0)


def default_area_side(n: int, cell_radius: float = DEFAULT_CELL_RADIUS_M) -> float:
    """Side of the square that n circular cells of ``cell_radius`` tile."""
    return math.sqrt(n * math.pi * cell_radius ** 2)


def _pair_within(radius: float, width: float, height: float) -> float:
    """Probability that two uniform points of a width x height rectangle are within ``radius``."""
    # exact for radius <= min(width, height)
    return (math.pi * radius ** 2 * width * height
            - 4.0 / 3.0 * radius ** 3 * (width + height)
            + radius ** 4 / 2.0) / (width * height) ** 2


def radius_for_mean_degree(n: int, mean_degree: float, area_side: float,
                           area_height: Optional[float] = None) -> float:
    """
    Connection radius giving ``mean_degree`` neighbors on average.

    Nodes near the border lose part of their disk, so the radius is solved
    against the border-corrected pair probability instead of pi r^2 / area.
    A target at or above n - 1 neighbors returns the area diagonal.
    """
    width = float(area_side)
    height = width if area_height is None else float(area_height)
    diagonal = math.hypot(width, height)
    if n < 2:
        return diagonal
    target = mean_degree / (n - 1)
    limit = min(width, height)
    if target >= _pair_within(limit, width, height):
        return diagonal
    return float(brentq(lambda r: _pair_within(r, width, height) - target, 0.0, limit))


def _bridge_components(g: nx.Graph, xy: np.ndarray,
                       nodes: Optional[Sequence[NodeId]] = None) -> List[Edge]:
    """
    Join the components of ``g`` (or of its subgraph on ``nodes``) in place.

    Every pair of components is scored by its closest node pair; the links
    added are a minimum spanning tree over those scores.
    """
    view = g if nodes is None else g.subgraph(nodes)
    components = sorted((sorted(c) for c in nx.connected_components(view)), key=lambda c: c[0])
    if len(components) < 2:
        return []
    links = nx.Graph()
    for a, first in enumerate(components):
        for b in range(a + 1, len(components)):
            second = components[b]
            gaps = np.linalg.norm(xy[first][:, None, :] - xy[second][None, :, :], axis=-1)
            i, j = np.unravel_index(int(np.argmin(gaps)), gaps.shape)
            links.add_edge(a, b, weight=float(gaps[i, j]), pair=(int(first[i]), int(second[j])))
    bridges = sorted(
        (min(data['pair']), max(data['pair']))
        for _, _, data in nx.minimum_spanning_edges(links, data=True)
    )
    g.add_edges_from(bridges)
    return bridges


def random_geometric(n: int, connection_radius: float,
                     area: Optional[Tuple[float, float]] = None,
                     seed: int = 0,
                     cell_radius: float = DEFAULT_CELL_RADIUS_M,
                     attach_anchor: bool = True,
                     anchor_link_hops: int = 1,
                     max_attempts: int = MAX_CONNECTIVITY_ATTEMPTS,
                     connectivity: Connectivity = Connectivity.RETRY) -> TopologyGraph:
    """
    Random geometric access network.

    Nodes are placed uniformly at random in ``area`` and joined when their
    distance is at most ``connection_radius``. With ``Connectivity.RETRY`` a
    disconnected placement is redrawn from derived sub-seeds; with
    ``Connectivity.BRIDGE`` the first placement is kept and its components are
    joined through their closest node pairs. The anchor hangs off the central
    node (``attach_anchor``) or is the central node itself, in which case the
    remaining access nodes must be connected on their own as well.

    Returns:
        TopologyGraph; a pure function of the arguments

    Raises:
        ConnectivityRetriesExhaustedError: If no attempt gives a connected graph
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if connection_radius <= 0:
        raise ValueError("connection_radius must be positive")
    connectivity = Connectivity(connectivity)
    if area is None:
        side = default_area_side(n, cell_radius)
        area = (side, side)
    name = f"rgg-{n}-s{seed}"

    for attempt, child in enumerate(np.random.SeedSequence(seed).spawn(max_attempts)):
        rng = np.random.default_rng(child)
        xy = rng.uniform(0.0, 1.0, size=(n, 2)) * np.asarray(area, dtype=float)
        pos = {k: tuple(xy[k]) for k in range(n)}
        g = nx.random_geometric_graph(n, connection_radius, pos=pos)
        bridges: List[Edge] = []
        if connectivity is Connectivity.BRIDGE:
            bridges = _bridge_components(g, xy)
        elif n > 1 and not nx.is_connected(g):
            continue

        edges = sorted((min(u, v), max(u, v)) for u, v in g.edges())
        center = central_node(_build(n, edges, 0, access_nodes=(), name=name)) if n > 1 else 0
        if not attach_anchor and n > 2:
            rest = [k for k in range(n) if k != center]
            if connectivity is Connectivity.BRIDGE:
                bridges += _bridge_components(g, xy, rest)
                edges = sorted((min(u, v), max(u, v)) for u, v in g.edges())
            elif not nx.is_connected(g.subgraph(rest)):
                continue
        break
    else:
        raise ConnectivityRetriesExhaustedError(
            f"No connected graph for n={n}, radius={connection_radius} "
            f"after {max_attempts} attempts"
        )

    positions = [tuple(xy[k]) for k in range(n)]
    logger.info("Random geometric graph %s connected on attempt %d (%d edges, %d bridged)",
                name, attempt + 1, len(edges), len(bridges))

    if not attach_anchor:
        return _build(n, edges, center, cell_radius=cell_radius,
                      positions=positions, name=name)

    edges, node_count, anchor = _with_anchor_chain(edges, n, center, anchor_link_hops)
    # core nodes sit on the attachment point's coordinates
    positions += [positions[center]] * (node_count - n)
    return _build(node_count, edges, anchor, access_nodes=range(n),
                  cell_radius=cell_radius, positions=positions, name=name)


def hop_counts(graph: TopologyGraph) -> HopMatrix:
    """
    All-pairs shortest-path hop counts by breadth-first search from every node.

    The matrix is computed once per graph and shared afterwards.
    """
    if graph._hop_cache:
        return graph._hop_cache[0]
    size = graph.node_count
    hops = np.full((size, size), -1, dtype=np.int64)
    for source, lengths in nx.all_pairs_shortest_path_length(graph.to_networkx()):
        for target, length in lengths.items():
            hops[source, target] = length
    if (hops < 0).any():
        raise DisconnectedGraphError("Hop counts requested on a disconnected graph")
    hops.setflags(write=False)
    matrix = HopMatrix(hops=hops)
    graph._hop_cache.append(matrix)
    return matrix


def central_node(graph: TopologyGraph, nodes: Optional[Iterable[NodeId]] = None) -> NodeId:
    """
    Node minimizing the mean hop distance to the others.

    Args:
        graph: Connected graph
        nodes: Candidate and target set (default: every node)

    Returns:
        The central node; ties go to the lowest NodeId
    """
    candidates = sorted(set(range(graph.node_count) if nodes is None else nodes))
    hops = hop_counts(graph).hops[np.ix_(candidates, candidates)]
    totals = hops.sum(axis=1)
    # argmin returns the first minimum, i.e. the lowest id among ties
    return candidates[int(np.argmin(totals))]


FIXTURES: Dict[str, Callable[[], TopologyGraph]] = {
    'paper-fig5': fixture_paper_topology,
    'fig4a': lambda: fig4_shape("a").graph,
    'fig4b': lambda: fig4_shape("b").graph,
}


def fixture(name: str) -> TopologyGraph:
    """Look up a reserved topology name."""
    try:
        return FIXTURES[name]()
    except KeyError:
        raise UnknownPresetError(
            f"Unknown fixture '{name}'. Available: {', '.join(sorted(FIXTURES))}"
        ) from None
