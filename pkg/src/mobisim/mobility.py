"""
Random-walk Markov mobility model.
Direction probability matrix, stationary location distribution, balance
check, mobility rate from speed and trajectory sampling.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from mobisim.errors import (
    DimensionMismatchError,
    DisconnectedGraphError,
    IsolatedNodeError,
    NoConvergenceError,
    NonPositiveInputError,
)
from mobisim.topology import NodeId, TopologyGraph

logger = logging.getLogger(__name__)

MPH_TO_MPS = 0.44704
STATIONARY_TOLERANCE = 1e-10
BALANCE_TOLERANCE = 1e-9
UNIFORM_RANDOM = "uniform"


class Convention(str, Enum):
    WITH_SELF_LOOP = "with_self_loop"
    WITHOUT_SELF_LOOP = "without_self_loop"


class Residence(str, Enum):
    EXPONENTIAL = "exponential"
    DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class DirectionMatrix:
    """Row-stochastic matrix over ``nodes``; row/column i is node ``nodes[i]``."""

    p: np.ndarray
    nodes: Tuple[NodeId, ...]
    convention: Convention

    def __len__(self) -> int:
        return len(self.nodes)

    def index_of(self, node: NodeId) -> int:
        return self.nodes.index(node)

    def prob(self, k: NodeId, j: NodeId) -> float:
        return float(self.p[self.index_of(k), self.index_of(j)])

    def moves(self) -> Iterator[Tuple[int, int]]:
        """State index pairs (i, j), i != j, with a nonzero transition."""
        rows, cols = np.nonzero(self.p)
        for i, j in zip(rows.tolist(), cols.tolist()):
            if i != j:
                yield i, j


@dataclass(frozen=True)
class StationaryVector:
    pi: np.ndarray
    nodes: Tuple[NodeId, ...]
    residual: float = 0.0

    def __len__(self) -> int:
        return len(self.nodes)

    def of(self, node: NodeId) -> float:
        return float(self.pi[self.nodes.index(node)])


@dataclass(frozen=True)
class MobilityRate:
    mu: float
    residence_time: float


class Visit(NamedTuple):
    node: NodeId
    dwell: float


@dataclass(frozen=True)
class Trajectory:
    visits: Tuple[Visit, ...]

    @property
    def nodes(self) -> List[NodeId]:
        return [v.node for v in self.visits]

    @property
    def total_time(self) -> float:
        return float(sum(v.dwell for v in self.visits))

    @property
    def handovers(self) -> int:
        return max(len(self.visits) - 1, 0)

    def moves(self) -> Iterator[Tuple[float, NodeId, NodeId]]:
        """(time, from, to) for every cell change."""
        t = 0.0
        for current, following in zip(self.visits, self.visits[1:]):
            t += current.dwell
            yield t, current.node, following.node

    def occupancy(self, nodes: Sequence[NodeId], until: Optional[float] = None) -> np.ndarray:
        """Fraction of time spent at each of ``nodes`` up to ``until``."""
        index = {node: i for i, node in enumerate(nodes)}
        spent = np.zeros(len(nodes))
        t = 0.0
        horizon = self.total_time if until is None else until
        for visit in self.visits:
            stay = min(visit.dwell, horizon - t)
            if stay <= 0:
                break
            spent[index[visit.node]] += stay
            t += visit.dwell
        return spent / spent.sum()


def direction_matrix(graph: TopologyGraph,
                     convention: Convention = Convention.WITH_SELF_LOOP,
                     nodes: Optional[Sequence[NodeId]] = None) -> DirectionMatrix:
    """
    Uniform-neighbor direction probability matrix.

    Args:
        graph: Topology
        convention: WITH_SELF_LOOP gives 1/(|N_k|+1) on N_k and k itself,
            WITHOUT_SELF_LOOP gives 1/|N_k| on N_k
        nodes: Markov chain states (default: the access nodes); neighbors are
            taken within the subgraph these nodes induce

    Returns:
        DirectionMatrix
    """
    states = tuple(graph.access_nodes if nodes is None else nodes)
    member = set(states)
    subgraph = graph.to_networkx().subgraph(states)
    if len(states) > 1 and not nx.is_connected(subgraph):
        raise DisconnectedGraphError("Mobility states do not form a connected subgraph")

    index = {node: i for i, node in enumerate(states)}
    p = np.zeros((len(states), len(states)))
    for i, k in enumerate(states):
        neighbors = sorted(graph.neighbors(k) & member)
        if not neighbors and convention is Convention.WITHOUT_SELF_LOOP:
            raise IsolatedNodeError(f"Node {k} has no neighbor to move to")
        if convention is Convention.WITH_SELF_LOOP:
            share = 1.0 / (len(neighbors) + 1)
            p[i, i] = share
        else:
            share = 1.0 / len(neighbors)
        for j in neighbors:
            p[i, index[j]] = share
    p.setflags(write=False)
    return DirectionMatrix(p=p, nodes=states, convention=Convention(convention))


def _residual(pi: np.ndarray, p: np.ndarray) -> float:
    return float(np.max(np.abs(pi @ p - pi)))


def stationary(matrix: DirectionMatrix, method: str = "solve",
               tol: float = STATIONARY_TOLERANCE, max_iter: int = 1_000_000) -> StationaryVector:
    """
    Solve Π = ΠP for the unique stationary location distribution.

    Args:
        matrix: Irreducible direction matrix
        method: "solve" (linear system) or "power" (iteration on the lazy chain)
        tol: Required max-norm residual of ΠP − Π
        max_iter: Power iteration cap

    Returns:
        StationaryVector normalized to sum 1
    """
    size = len(matrix)
    p = matrix.p
    if method == "solve":
        a = p.T - np.eye(size)
        a[-1, :] = 1.0
        b = np.zeros(size)
        b[-1] = 1.0
        pi = np.linalg.solve(a, b)
    elif method == "power":
        # (I + P) / 2 shares Π with P and is aperiodic
        lazy = 0.5 * (np.eye(size) + p)
        pi = np.full(size, 1.0 / size)
        for _ in range(max_iter):
            nxt = pi @ lazy
            if np.max(np.abs(nxt - pi)) <= tol / 10:
                pi = nxt
                break
            pi = nxt
        else:
            raise NoConvergenceError(f"Power iteration did not converge in {max_iter} steps")
    else:
        raise ValueError(f"Unknown stationary method '{method}'")

    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    residual = _residual(pi, p)
    if residual > tol:
        raise NoConvergenceError(f"Stationary residual {residual:.3e} exceeds {tol:.1e}")
    logger.debug("Stationary vector by %s over %d states, residual %.2e", method, size, residual)
    pi.setflags(write=False)
    return StationaryVector(pi=pi, nodes=matrix.nodes, residual=residual)


@dataclass(frozen=True)
class BalanceReport:
    ok: bool
    max_residual: float
    residuals: np.ndarray


def verify_balance(matrix: DirectionMatrix, pi: Union[StationaryVector, Sequence[float]],
                   mu: Union[MobilityRate, float] = 1.0) -> BalanceReport:
    """
    Evaluate the global balance equation at every state.

    Residual at k is |N_k| π_k p_k μ − Σ_{j∈N_k} π_j p_(j,k) μ, with p_k the
    common probability of leaving k towards any one neighbor.
    """
    vector = np.asarray(pi.pi if isinstance(pi, StationaryVector) else pi, dtype=float)
    if vector.shape != (len(matrix),):
        raise DimensionMismatchError(f"Π has {vector.size} entries, matrix has {len(matrix)} states")
    rate = mu.mu if isinstance(mu, MobilityRate) else float(mu)

    off = matrix.p.copy()
    np.fill_diagonal(off, 0.0)
    degree = (off > 0).sum(axis=1)
    p_out = np.divide(off.sum(axis=1), degree, out=np.zeros(len(matrix)), where=degree > 0)
    outflow = degree * vector * p_out * rate
    inflow = (vector @ off) * rate
    residuals = np.abs(outflow - inflow)
    worst = float(residuals.max()) if residuals.size else 0.0
    return BalanceReport(ok=worst <= BALANCE_TOLERANCE, max_residual=worst, residuals=residuals)


def mph_to_mps(mph: float) -> float:
    return mph * MPH_TO_MPS


def mobility_rate(speed: float, cell_radius: float) -> MobilityRate:
    """
    Cell-border crossing rate of a node moving at ``speed`` m/s.

    The residence time is the mean chord length of a circular cell,
    π·r/2, divided by the speed.
    """
    if speed <= 0 or cell_radius <= 0:
        raise NonPositiveInputError("speed and cell_radius must be positive")
    residence = (math.pi * cell_radius / 2.0) / speed
    return MobilityRate(mu=1.0 / residence, residence_time=residence)


def sample_trajectory(rng: np.random.Generator, graph: TopologyGraph, matrix: DirectionMatrix,
                      mu: Union[MobilityRate, float], duration: float,
                      start: Union[NodeId, str] = UNIFORM_RANDOM,
                      residence: Residence = Residence.EXPONENTIAL) -> Trajectory:
    """
    Sample a random walk covering at least ``duration`` seconds.

    Dwell periods are drawn with mean 1/μ; a self-transition extends the
    current visit instead of starting a new one. A rate of 0 keeps the node
    at its start for the whole duration.
    """
    if duration <= 0:
        raise NonPositiveInputError("duration must be positive")
    rate = mu.mu if isinstance(mu, MobilityRate) else float(mu)
    if rate < 0:
        raise NonPositiveInputError("mobility rate must not be negative")

    if start == UNIFORM_RANDOM:
        state = int(rng.integers(len(matrix)))
    else:
        if not graph.has_node(start):
            raise ValueError(f"Start node {start} is not in the graph")
        state = matrix.index_of(start)

    if rate == 0:
        return Trajectory(visits=(Visit(matrix.nodes[state], float(duration)),))

    cumulative = np.cumsum(matrix.p, axis=1)
    last = len(matrix) - 1
    visits: List[Visit] = []
    elapsed = 0.0
    dwell = 0.0
    while True:
        step = rng.exponential(1.0 / rate) if residence == Residence.EXPONENTIAL else 1.0 / rate
        dwell += step
        elapsed += step
        if elapsed >= duration:
            visits.append(Visit(matrix.nodes[state], dwell))
            break
        nxt = min(int(np.searchsorted(cumulative[state], rng.random(), side="right")), last)
        if nxt == state:
            continue
        visits.append(Visit(matrix.nodes[state], dwell))
        dwell = 0.0
        state = nxt
    return Trajectory(visits=tuple(visits))
