"""
Proxy Mobile IPv6 domain.
Binding cache at the LMA, MAG-initiated registration and deregistration,
tunneled delivery through the anchor and handover latency.
"""

import logging
from typing import Dict, Hashable, List, Optional, Set, Tuple

from mobisim.errors import AlreadyBoundError, InvalidMagError, NotBoundError, SameMagError
from mobisim.messages import (
    HandoverTrace,
    MessageCatalog,
    MessageEvent,
    MessageKind,
    default_catalog,
    message,
)
from mobisim.topology import NodeId, TopologyGraph, hop_counts

logger = logging.getLogger(__name__)

MnId = Hashable


def pmip_latency(h_ka: int, h_ja: int, p: float = 1.0, m: float = 1.0) -> float:
    """
    Handover latency T_c = 5p + m·h_ka + 2m·h_ja.

    The PBA back to the previous MAG is not on the critical path.
    """
    return 5 * p + m * h_ka + 2 * m * h_ja


class PmipDomain:
    """
    Single PMIPv6 domain whose LMA sits at the graph's anchor.

    Every access node is a MAG; the LMA itself never serves a mobile node.
    """

    def __init__(self, graph: TopologyGraph, catalog: Optional[MessageCatalog] = None,
                 p: float = 1.0, m: float = 1.0):
        self.graph = graph
        self.catalog = catalog or default_catalog()
        self.p = p
        self.m = m
        self.lma = graph.anchor
        self.binding_cache: Dict[MnId, NodeId] = {}
        self._tunnel_users: Dict[NodeId, int] = {}

    @property
    def tunnels(self) -> Set[Tuple[NodeId, NodeId]]:
        """(LMA, MAG) pairs with at least one bound mobile node."""
        return {(self.lma, mag) for mag, users in self._tunnel_users.items() if users > 0}

    def _check_mag(self, mag: NodeId) -> None:
        if mag == self.lma or not self.graph.is_access(mag):
            raise InvalidMagError(f"Node {mag} is not a MAG of this domain")

    def _bind(self, mn: MnId, mag: NodeId) -> None:
        self.binding_cache[mn] = mag
        self._tunnel_users[mag] = self._tunnel_users.get(mag, 0) + 1

    def _unbind(self, mn: MnId) -> NodeId:
        mag = self.binding_cache.pop(mn)
        self._tunnel_users[mag] -= 1
        if self._tunnel_users[mag] == 0:
            del self._tunnel_users[mag]
        return mag

    def _registration(self, mag: NodeId) -> List[MessageEvent]:
        return [
            message(self.graph, self.catalog, MessageKind.PBU, mag, self.lma),
            message(self.graph, self.catalog, MessageKind.PBA, self.lma, mag),
        ]

    def attach(self, mn: MnId, mag: NodeId) -> HandoverTrace:
        """
        Register a newly arrived mobile node at ``mag``.

        Raises:
            AlreadyBoundError: If ``mn`` already has a binding
            InvalidMagError: If ``mag`` is the LMA or not an access node
        """
        if mn in self.binding_cache:
            raise AlreadyBoundError(f"MN {mn} is already bound at MAG {self.binding_cache[mn]}")
        self._check_mag(mag)
        self._bind(mn, mag)
        return HandoverTrace(events=tuple(self._registration(mag)))

    def detach(self, mn: MnId) -> HandoverTrace:
        """Deregister ``mn`` from its MAG and drop the binding."""
        if mn not in self.binding_cache:
            raise NotBoundError(f"MN {mn} has no binding")
        mag = self._unbind(mn)
        return HandoverTrace(events=tuple(self._registration(mag)))

    def handover(self, mn: MnId, from_mag: NodeId, to_mag: NodeId) -> HandoverTrace:
        """
        Move ``mn`` from ``from_mag`` to ``to_mag``.

        The old MAG deregisters (PBU/PBA) and the new MAG registers (PBU/PBA),
        so the control plane carries (L_u + L_a)(h_ka + h_ja) hop·bytes.

        Raises:
            NotBoundError: If ``mn`` is not bound at ``from_mag``
            SameMagError: If both MAGs are the same
        """
        if self.binding_cache.get(mn) != from_mag:
            raise NotBoundError(f"MN {mn} is not bound at MAG {from_mag}")
        if to_mag == from_mag:
            raise SameMagError(f"Handover of MN {mn} to its current MAG {from_mag}")
        self._check_mag(to_mag)

        events = self._registration(from_mag) + self._registration(to_mag)
        self._unbind(mn)
        self._bind(mn, to_mag)
        logger.debug("PMIP handover of MN %s: MAG %d -> %d", mn, from_mag, to_mag)
        return HandoverTrace(
            events=tuple(events),
            latency_units=self.handover_latency(from_mag, to_mag),
        )

    def deliver_packet(self, cn_mag: NodeId, mn: MnId, uplink: bool = False,
                       payload_bytes: Optional[int] = None) -> List[MessageEvent]:
        """
        Tunneled delivery CN -> LMA -> serving MAG of one packet.

        With ``uplink`` the reverse direction is charged too. ``payload_bytes``
        overrides the catalog payload for this packet.
        """
        if mn not in self.binding_cache:
            raise NotBoundError(f"MN {mn} has no binding")
        mag = self.binding_cache[mn]
        legs = [(cn_mag, self.lma), (self.lma, mag)]
        if uplink:
            legs += [(mag, self.lma), (self.lma, cn_mag)]
        catalog = self.catalog.with_payload(payload_bytes)
        return [message(self.graph, catalog, MessageKind.DATA_PMIP, u, v) for u, v in legs]

    def handover_latency(self, k: NodeId, j: NodeId) -> float:
        hops = hop_counts(self.graph)
        return pmip_latency(hops[k, self.lma], hops[j, self.lma], self.p, self.m)
