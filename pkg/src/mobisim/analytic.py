"""
Closed-form cost model.
Signaling, packet delivery and handover latency of both schemes evaluated
over a topology and its stationary random-walk distribution.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from mobisim.errors import DimensionMismatchError, NonPositiveInputError
from mobisim.ipoicn import icn_latency
from mobisim.messages import MessageCatalog, Scheme, default_catalog
from mobisim.mobility import DirectionMatrix, MobilityRate, StationaryVector
from mobisim.pmipv6 import pmip_latency
from mobisim.topology import NodeId, TopologyGraph, hop_counts

logger = logging.getLogger(__name__)

CnPlacement = Union[NodeId, str]
RANDOM_CN = "random"

# latency values closer than this are the same histogram bin
LATENCY_DECIMALS = 9


@dataclass(frozen=True)
class TrafficModel:
    """CN -> MN flow: ``bit_rate`` bits/s in packets of ``payload_bytes``."""

    bit_rate: float = 1_000_000.0
    payload_bytes: int = 1024
    arrivals: str = "poisson"
    uplink: bool = False
    packet_rate_override: Optional[float] = None

    def __post_init__(self):
        if self.bit_rate < 0:
            raise NonPositiveInputError("bit_rate must not be negative")
        if self.payload_bytes <= 0:
            raise NonPositiveInputError("payload_bytes must be positive")
        if self.arrivals not in ("poisson", "fluid"):
            raise ValueError(f"Unknown arrival mode '{self.arrivals}'")

    @property
    def packet_rate(self) -> float:
        """R, packets per second."""
        if self.packet_rate_override is not None:
            return self.packet_rate_override
        return self.bit_rate / (8.0 * self.payload_bytes)

    @property
    def directions(self) -> int:
        return 2 if self.uplink else 1


@dataclass(frozen=True)
class CostReport:
    scheme: Scheme
    signaling: float
    delivery: float
    latency_distribution: List[Tuple[float, float]] = field(default_factory=list)

    @property
    def total(self) -> float:
        return self.signaling + self.delivery

    def mean_latency(self) -> float:
        return float(sum(v * w for v, w in self.latency_distribution))

    def to_dict(self) -> Dict:
        return {
            'scheme': self.scheme.value,
            'signaling': self.signaling,
            'delivery': self.delivery,
            'total': self.total,
            'mean_latency': self.mean_latency(),
        }


def _rate(mu: Union[MobilityRate, float]) -> float:
    return mu.mu if isinstance(mu, MobilityRate) else float(mu)


def _check(pi: StationaryVector, matrix: Optional[DirectionMatrix] = None) -> None:
    if matrix is not None and (len(pi) != len(matrix) or tuple(pi.nodes) != tuple(matrix.nodes)):
        raise DimensionMismatchError(
            f"Π over {len(pi)} states does not match P over {len(matrix)} states"
        )


def _move_weights(pi: StationaryVector, matrix: DirectionMatrix) -> np.ndarray:
    """π_k p_(k,j) for every j != k; self-transitions are not handovers."""
    off = np.array(matrix.p, dtype=float)
    np.fill_diagonal(off, 0.0)
    return pi.pi[:, None] * off


def _to_targets(graph: TopologyGraph, nodes: Sequence[NodeId], target: CnPlacement) -> np.ndarray:
    """
    Hop counts from each of ``nodes`` to ``target``.

    For a random target the distance is averaged uniformly over access nodes.
    """
    hops = hop_counts(graph).hops
    if target == RANDOM_CN:
        return hops[np.ix_(list(nodes), list(graph.access_nodes))].mean(axis=1)
    if not graph.is_access(target):
        raise ValueError(f"CN placement {target} is not an access node")
    return hops[list(nodes), target].astype(float)


def pmip_signaling(graph: TopologyGraph, pi: StationaryVector, matrix: DirectionMatrix,
                   mu: Union[MobilityRate, float],
                   catalog: Optional[MessageCatalog] = None) -> float:
    """
    PMIPv6 signaling cost Υ in hops·bytes/s.

    Υ = Σ_k Σ_(j≠k) π_k p_(k,j) μ (L_u + L_a)(h_ka + h_ja)
    """
    _check(pi, matrix)
    catalog = catalog or default_catalog()
    h_a = hop_counts(graph).to_anchor(matrix.nodes, graph.anchor).astype(float)
    weights = _move_weights(pi, matrix)
    per_move = h_a[:, None] + h_a[None, :]
    return float(_rate(mu) * catalog.binding_pair_bytes * np.sum(weights * per_move))


def pmip_delivery(graph: TopologyGraph, pi: StationaryVector, traffic: TrafficModel,
                  cn_nap: CnPlacement, catalog: Optional[MessageCatalog] = None) -> float:
    """
    PMIPv6 packet delivery cost Λ in hops·bytes/s.

    Λ = Σ_k π_k R (h_sa + h_ka)(φ + ζ)
    """
    catalog = catalog or default_catalog()
    nodes = list(pi.nodes)
    h_a = hop_counts(graph).to_anchor(nodes, graph.anchor).astype(float)
    if cn_nap == RANDOM_CN:
        h_sa = float(hop_counts(graph).to_anchor(graph.access_nodes, graph.anchor).mean())
    else:
        h_sa = float(_to_targets(graph, [graph.anchor], cn_nap)[0])
    per_packet = (h_sa + h_a) * catalog.pmip_packet_bytes
    return float(traffic.directions * traffic.packet_rate * np.dot(pi.pi, per_packet))


def icn_signaling(graph: TopologyGraph, pi: StationaryVector, matrix: DirectionMatrix,
                  mu: Union[MobilityRate, float], catalog: Optional[MessageCatalog] = None,
                  cn_nap: CnPlacement = RANDOM_CN, rv: Optional[NodeId] = None) -> float:
    """
    IP-over-ICN signaling cost Υ' in hops·bytes/s, PubiSub payload excluded.

    Υ' = Σ_k Σ_(j≠k) π_k p_(k,j) μ (h_ks ℓ_u + h_jv (ℓ_r + ℓ_s) + h_js ℓ_p)
    """
    _check(pi, matrix)
    catalog = catalog or default_catalog()
    rv = graph.anchor if rv is None else rv
    nodes = matrix.nodes
    h_s = _to_targets(graph, nodes, cn_nap)
    h_v = hop_counts(graph).hops[list(nodes), rv].astype(float)
    weights = _move_weights(pi, matrix)
    per_move = (
        h_s[:, None] * catalog.iunsub_bytes
        + h_v[None, :] * (catalog.pub_request_bytes + catalog.start_publish_bytes)
        + h_s[None, :] * catalog.pubisub_bytes
    )
    return float(_rate(mu) * np.sum(weights * per_move))


def icn_delivery(graph: TopologyGraph, pi: StationaryVector, traffic: TrafficModel,
                 cn_nap: CnPlacement, catalog: Optional[MessageCatalog] = None) -> float:
    """
    IP-over-ICN packet delivery cost Λ' in hops·bytes/s.

    Λ' = Σ_k π_k R' h_sk (φ' + ζ)
    """
    catalog = catalog or default_catalog()
    h_s = _to_targets(graph, pi.nodes, cn_nap)
    per_packet = h_s * catalog.icn_packet_bytes
    return float(traffic.directions * traffic.packet_rate * np.dot(pi.pi, per_packet))


def latency_distribution(graph: TopologyGraph, pi: StationaryVector, matrix: DirectionMatrix,
                         scheme: Scheme, p: float = 1.0, m: float = 1.0,
                         cn_nap: CnPlacement = RANDOM_CN,
                         rv: Optional[NodeId] = None,
                         attach_delay: float = 0.0) -> List[Tuple[float, float]]:
    """
    Handover latency distribution under stationary movement.

    Every transition k -> j (j != k) is weighted by π_k p_(k,j); a random CN
    placement further splits each weight uniformly over the access nodes.

    Returns:
        Sorted (latency, probability) pairs with probabilities summing to 1
    """
    _check(pi, matrix)
    scheme = Scheme(scheme)
    if scheme is Scheme.BOTH:
        raise ValueError("Latency distribution is per scheme")
    if p <= 0 or m <= 0:
        raise NonPositiveInputError("p and m must be positive")
    hops = hop_counts(graph)
    rv = graph.anchor if rv is None else rv
    weights = _move_weights(pi, matrix)
    total = weights.sum()
    if total <= 0:
        return []
    targets = list(graph.access_nodes) if cn_nap == RANDOM_CN else [cn_nap]

    bins: Dict[float, float] = defaultdict(float)
    for i, j in matrix.moves():
        k_node, j_node = matrix.nodes[i], matrix.nodes[j]
        weight = weights[i, j] / total
        if scheme is Scheme.PMIP:
            value = pmip_latency(hops[k_node, graph.anchor], hops[j_node, graph.anchor], p, m)
            bins[round(value + attach_delay, LATENCY_DECIMALS)] += weight
            continue
        for s in targets:
            value = icn_latency(hops[k_node, s], hops[j_node, rv], p, m)
            bins[round(value + attach_delay, LATENCY_DECIMALS)] += weight / len(targets)
    return sorted(bins.items())


def analyze(graph: TopologyGraph, matrix: DirectionMatrix, pi: StationaryVector,
            mu: Union[MobilityRate, float], traffic: TrafficModel,
            catalog: Optional[MessageCatalog] = None, cn_nap: CnPlacement = RANDOM_CN,
            scheme: Scheme = Scheme.BOTH, p: float = 1.0, m: float = 1.0,
            rv: Optional[NodeId] = None, attach_delay: float = 0.0) -> Dict[Scheme, CostReport]:
    """
    Evaluate every cost function for the requested scheme(s).

    Returns:
        CostReport per scheme, PMIP first
    """
    catalog = catalog or default_catalog()
    scheme = Scheme(scheme)
    reports: Dict[Scheme, CostReport] = {}
    if scheme in (Scheme.PMIP, Scheme.BOTH):
        reports[Scheme.PMIP] = CostReport(
            scheme=Scheme.PMIP,
            signaling=pmip_signaling(graph, pi, matrix, mu, catalog),
            delivery=pmip_delivery(graph, pi, traffic, cn_nap, catalog),
            latency_distribution=latency_distribution(
                graph, pi, matrix, Scheme.PMIP, p, m, cn_nap, rv, attach_delay
            ),
        )
    if scheme in (Scheme.ICN, Scheme.BOTH):
        reports[Scheme.ICN] = CostReport(
            scheme=Scheme.ICN,
            signaling=icn_signaling(graph, pi, matrix, mu, catalog, cn_nap, rv),
            delivery=icn_delivery(graph, pi, traffic, cn_nap, catalog),
            latency_distribution=latency_distribution(
                graph, pi, matrix, Scheme.ICN, p, m, cn_nap, rv, attach_delay
            ),
        )
    for report in reports.values():
        logger.info("%s analytic cost: signaling %.3f, delivery %.1f hops·bytes/s",
                    report.scheme.value, report.signaling, report.delivery)
    return reports
