"""
IP-over-ICN domain.
Rendezvous matching of IP scopes, NAP forwarding tables and local matches,
session establishment, anchorless handover and direct-path delivery.
"""

import ipaddress
import logging
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Tuple

from mobisim.errors import (
    AlreadyBoundError,
    NoMatchError,
    NoSubscriberError,
    NotAttachedError,
    SameNapError,
)
from mobisim.messages import (
    Fid,
    HandoverTrace,
    MessageCatalog,
    MessageEvent,
    MessageKind,
    ScopeId,
    default_catalog,
    fid_for,
    fid_table,
    message,
    scope_id,
)
from mobisim.topology import NodeId, TopologyGraph, hop_counts

logger = logging.getLogger(__name__)

EndpointId = Hashable
DEFAULT_PREFIX = "10.0.0.0/8"


def icn_latency(h_ks: int, h_jv: int, p: float = 1.0, m: float = 1.0) -> float:
    """
    Handover latency T_c' = 5p + m·h_ks + 2m·h_jv.

    The PubiSub carries the first payload and adds no latency of its own.
    """
    return 5 * p + m * h_ks + 2 * m * h_jv


@dataclass
class RendezvousServer:
    """Domain RV (with the TM co-located) matching scopes to subscriber NAPs."""

    node: NodeId
    subscriptions: Dict[ScopeId, NodeId] = field(default_factory=dict)
    pending: Dict[ScopeId, NodeId] = field(default_factory=dict)

    def subscribe(self, scope: ScopeId, nap: NodeId) -> None:
        self.subscriptions[scope] = nap

    def lookup(self, scope: ScopeId) -> NodeId:
        try:
            return self.subscriptions[scope]
        except KeyError:
            raise NoSubscriberError(f"No NAP subscribed to scope {scope.hex()[:12]}") from None

    def publish_request(self, scope: ScopeId, nap: NodeId) -> None:
        self.pending[scope] = nap

    def start_publish(self, scope: ScopeId) -> NodeId:
        return self.pending.pop(scope)


@dataclass
class Nap:
    node: NodeId
    fids: Dict[NodeId, Fid] = field(default_factory=dict)
    local_matches: Dict[ScopeId, NodeId] = field(default_factory=dict)


@dataclass
class MnAttachment:
    mn: EndpointId
    nap: NodeId
    ip_address: str
    scope: ScopeId


class IcnDomain:
    """
    Single IP-over-ICN domain.

    Mobile and correspondent nodes are named by the scope of their IP
    address. Data always follows the shortest NAP-to-NAP path; the RV is
    only on the control path.
    """

    def __init__(self, graph: TopologyGraph, catalog: Optional[MessageCatalog] = None,
                 rv: Optional[NodeId] = None, p: float = 1.0, m: float = 1.0,
                 prefix: str = DEFAULT_PREFIX):
        self.graph = graph
        self.catalog = catalog or default_catalog()
        self.rv = RendezvousServer(node=graph.anchor if rv is None else rv)
        self.p = p
        self.m = m
        self.prefix = ipaddress.ip_network(prefix)
        self.naps: Dict[NodeId, Nap] = {k: Nap(node=k) for k in graph.access_nodes}
        self.attachments: Dict[EndpointId, MnAttachment] = {}
        self.correspondents: Dict[EndpointId, MnAttachment] = {}
        self.sessions: Dict[EndpointId, EndpointId] = {}
        self._next_host = 1

    def _nap(self, node: NodeId) -> Nap:
        try:
            return self.naps[node]
        except KeyError:
            raise ValueError(f"Node {node} is not a NAP of this domain") from None

    def fid(self, src: NodeId, dst: NodeId) -> Fid:
        """FID from NAP ``src`` to NAP ``dst``, resolved by the TM on first use."""
        fids = self._nap(src).fids
        if dst not in fids:
            fids[dst] = fid_for(self.graph, src, dst)
        return fids[dst]

    def provision_fids(self) -> None:
        """Hand every NAP the complete set of FIDs to all other NAPs."""
        for node, nap in self.naps.items():
            nap.fids = fid_table(self.graph, node)

    def _allocate(self, endpoint: EndpointId, nap: NodeId) -> MnAttachment:
        address = str(self.prefix.network_address + self._next_host)
        self._next_host += 1
        return MnAttachment(
            mn=endpoint,
            nap=nap,
            ip_address=address,
            scope=scope_id(str(self.prefix), address),
        )

    def _msg(self, kind: MessageKind, src: NodeId, dst: NodeId) -> MessageEvent:
        return message(self.graph, self.catalog, kind, src, dst)

    def register_cn(self, cn: EndpointId, nap: NodeId) -> ScopeId:
        """Place a static correspondent at ``nap`` and subscribe its scope at the RV."""
        self._nap(nap)
        record = self._allocate(cn, nap)
        self.correspondents[cn] = record
        self.rv.subscribe(record.scope, nap)
        return record.scope

    def attach(self, mn: EndpointId, nap: NodeId) -> HandoverTrace:
        """
        First attachment of ``mn``; the address it gets here is kept for life.

        Subscription state is installed locally and costs nothing on the wire.
        """
        self._nap(nap)
        if mn in self.attachments:
            raise AlreadyBoundError(f"MN {mn} is already attached at NAP {self.attachments[mn].nap}")
        record = self._allocate(mn, nap)
        self.attachments[mn] = record
        self.rv.subscribe(record.scope, nap)
        return HandoverTrace(events=())

    def session_establish(self, mn: EndpointId, cn: EndpointId) -> HandoverTrace:
        """
        Set up the MN -> CN session.

        The MN's NAP asks the RV where the CN scope lives, receives a
        START_PUBLISH and sends the first PubiSub directly. When the CN's NAP
        already holds a match for this MN at the same NAP, only the PubiSub
        is sent.

        Raises:
            NotAttachedError: If ``mn`` is not attached
            NoSubscriberError: If the RV knows no NAP for the CN's scope
        """
        if mn not in self.attachments:
            raise NotAttachedError(f"MN {mn} is not attached")
        if cn not in self.correspondents:
            raise NoSubscriberError(f"CN {cn} is not subscribed at the RV")
        mn_record = self.attachments[mn]
        cn_record = self.correspondents[cn]
        nap_a = mn_record.nap
        nap_b = self.rv.lookup(cn_record.scope)

        events: List[MessageEvent] = []
        if self._nap(nap_b).local_matches.get(mn_record.scope) != nap_a:
            self.rv.publish_request(cn_record.scope, nap_a)
            events.append(self._msg(MessageKind.PUB_REQUEST, nap_a, self.rv.node))
            self.rv.start_publish(cn_record.scope)
            events.append(self._msg(MessageKind.START_PUBLISH, self.rv.node, nap_a))
        events.append(self._msg(MessageKind.PUBISUB, nap_a, nap_b))

        self._nap(nap_b).local_matches[mn_record.scope] = nap_a
        self._nap(nap_a).local_matches[cn_record.scope] = nap_b
        self.sessions[mn] = cn
        return HandoverTrace(events=tuple(events))

    def handover(self, mn: EndpointId, from_nap: NodeId, to_nap: NodeId) -> HandoverTrace:
        """
        Move ``mn`` from ``from_nap`` to ``to_nap`` keeping its address.

        The old NAP implicitly unsubscribes at the CN's NAP, the new NAP
        resolves the CN scope through the RV and re-points the CN's local
        match with a PubiSub.

        Raises:
            NotAttachedError: If ``mn`` is not attached at ``from_nap`` or has no session
            SameNapError: If both NAPs are the same
        """
        record = self.attachments.get(mn)
        if record is None or record.nap != from_nap:
            raise NotAttachedError(f"MN {mn} is not attached at NAP {from_nap}")
        if to_nap == from_nap:
            raise SameNapError(f"Handover of MN {mn} to its current NAP {from_nap}")
        if mn not in self.sessions:
            raise NotAttachedError(f"MN {mn} has no active session")
        self._nap(to_nap)

        cn_scope = self.correspondents[self.sessions[mn]].scope
        s = self.rv.lookup(cn_scope)
        events = [self._msg(MessageKind.IUNSUB, from_nap, s)]
        self._nap(from_nap).local_matches.pop(cn_scope, None)
        self._nap(s).local_matches.pop(record.scope, None)

        self.rv.publish_request(cn_scope, to_nap)
        events.append(self._msg(MessageKind.PUB_REQUEST, to_nap, self.rv.node))
        self.rv.start_publish(cn_scope)
        events.append(self._msg(MessageKind.START_PUBLISH, self.rv.node, to_nap))
        events.append(self._msg(MessageKind.PUBISUB, to_nap, s))

        self._nap(s).local_matches[record.scope] = to_nap
        self._nap(to_nap).local_matches[cn_scope] = s
        self.rv.subscribe(record.scope, to_nap)
        record.nap = to_nap
        logger.debug("ICN handover of MN %s: NAP %d -> %d (CN at %d)", mn, from_nap, to_nap, s)
        return HandoverTrace(
            events=tuple(events),
            latency_units=self.handover_latency(from_nap, to_nap, s),
        )

    def deliver_packet(self, mn: EndpointId, uplink: bool = False,
                       payload_bytes: Optional[int] = None) -> List[MessageEvent]:
        """
        Direct delivery of one packet from the CN's NAP to the MN's NAP.

        ``payload_bytes`` overrides the catalog payload for this packet.

        Raises:
            NoMatchError: If the CN's NAP holds no local match for the MN
        """
        record = self.attachments.get(mn)
        if record is None or mn not in self.sessions:
            raise NoMatchError(f"MN {mn} has no established session")
        s = self.rv.lookup(self.correspondents[self.sessions[mn]].scope)
        k = self._nap(s).local_matches.get(record.scope)
        if k is None:
            raise NoMatchError(f"NAP {s} holds no match for MN {mn}")
        legs = [self.fid(s, k)] + ([self.fid(k, s)] if uplink else [])
        catalog = self.catalog.with_payload(payload_bytes)
        return [message(self.graph, catalog, MessageKind.DATA_ICN, f.src, f.dst) for f in legs]

    def handover_latency(self, k: NodeId, j: NodeId, s: NodeId) -> float:
        hops = hop_counts(self.graph)
        return icn_latency(hops[k, s], hops[j, self.rv.node], self.p, self.m)

    def matches_for(self, scope: ScopeId) -> List[Tuple[NodeId, NodeId]]:
        """Every (holder NAP, target NAP) local match for ``scope`` domain-wide."""
        return [
            (nap.node, nap.local_matches[scope])
            for nap in self.naps.values()
            if scope in nap.local_matches
        ]
