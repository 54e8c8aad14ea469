"""
Protocol message catalog.
Message kinds and byte sizes for both schemes, ICN scope naming, resolved
forwarding identifiers and the costed message events the protocol state
machines emit.
"""

import hashlib
import ipaddress
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import networkx as nx

from mobisim.errors import ConfigInvalidError, MalformedAddressError
from mobisim.topology import NodeId, TopologyGraph, hop_counts

SCOPE_ID_BYTES = 32


class MessageKind(str, Enum):
    PBU = "PBU"
    PBA = "PBA"
    IUNSUB = "IUNSUB"
    PUB_REQUEST = "PUB_REQUEST"
    START_PUBLISH = "START_PUBLISH"
    PUBISUB = "PUBISUB"
    DATA_PMIP = "DATA_PMIP"
    DATA_ICN = "DATA_ICN"


class Plane(str, Enum):
    CONTROL = "CONTROL"
    DATA = "DATA"


class Scheme(str, Enum):
    PMIP = "PMIP"
    ICN = "ICN"
    BOTH = "BOTH"


# JSON key -> catalog field
CATALOG_KEYS: Dict[str, str] = {
    'L_u': 'pbu_bytes',
    'L_a': 'pba_bytes',
    'zeta': 'payload_bytes',
    'phi': 'tunnel_header_bytes',
    'ell_u': 'iunsub_bytes',
    'ell_r': 'pub_request_bytes',
    'ell_s': 'start_publish_bytes',
    'ell_p': 'pubisub_bytes',
    'phi_prime': 'icn_header_bytes',
}


@dataclass(frozen=True)
class MessageCatalog:
    """Byte sizes of every message both schemes exchange."""

    pbu_bytes: int = 76
    pba_bytes: int = 76
    payload_bytes: int = 1024
    tunnel_header_bytes: int = 40
    iunsub_bytes: int = 166
    pub_request_bytes: int = 160
    start_publish_bytes: int = 166
    pubisub_bytes: int = 166
    icn_header_bytes: int = 96

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
                raise ConfigInvalidError(f"Message size {f.name} must be a positive integer")

    def size(self, kind: MessageKind) -> int:
        """
        Size of one message of ``kind``.

        Data kinds include their header; PUBISUB is the signaling size
        without the piggybacked payload.
        """
        return {
            MessageKind.PBU: self.pbu_bytes,
            MessageKind.PBA: self.pba_bytes,
            MessageKind.IUNSUB: self.iunsub_bytes,
            MessageKind.PUB_REQUEST: self.pub_request_bytes,
            MessageKind.START_PUBLISH: self.start_publish_bytes,
            MessageKind.PUBISUB: self.pubisub_bytes,
            MessageKind.DATA_PMIP: self.pmip_packet_bytes,
            MessageKind.DATA_ICN: self.icn_packet_bytes,
        }[MessageKind(kind)]

    def with_payload(self, payload_bytes: Optional[int]) -> "MessageCatalog":
        """Same catalog carrying ``payload_bytes`` of data per packet."""
        if payload_bytes is None or payload_bytes == self.payload_bytes:
            return self
        return replace(self, payload_bytes=payload_bytes)

    @property
    def binding_pair_bytes(self) -> int:
        """PBU plus PBA, charged once per MAG path."""
        return self.pbu_bytes + self.pba_bytes

    @property
    def pmip_packet_bytes(self) -> int:
        return self.payload_bytes + self.tunnel_header_bytes

    @property
    def icn_packet_bytes(self) -> int:
        return self.payload_bytes + self.icn_header_bytes

    def to_config(self) -> Dict[str, int]:
        values = asdict(self)
        return {key: values[name] for key, name in CATALOG_KEYS.items()}

    @classmethod
    def from_config(cls, overrides: Optional[Dict[str, int]] = None) -> 'MessageCatalog':
        """
        Build a catalog from its JSON form; missing keys keep their defaults.

        Raises:
            ConfigInvalidError: On unknown keys or non-positive sizes
        """
        overrides = overrides or {}
        unknown = set(overrides) - set(CATALOG_KEYS)
        if unknown:
            raise ConfigInvalidError(f"Unknown catalog keys: {', '.join(sorted(unknown))}")
        return cls(**{CATALOG_KEYS[key]: value for key, value in overrides.items()})


def default_catalog() -> MessageCatalog:
    return MessageCatalog()


@dataclass(frozen=True)
class ScopeId:
    digest: bytes

    def __post_init__(self):
        if len(self.digest) != SCOPE_ID_BYTES:
            raise ValueError(f"ScopeId must be {SCOPE_ID_BYTES} bytes")

    def hex(self) -> str:
        return self.digest.hex()


def scope_id(ip_prefix: str, ip_address: str) -> ScopeId:
    """
    Name an IP address under its prefix.

    The canonical scope string is "/<network>-<prefixlen>/<address>", for
    example "/10.0.0.0-8/10.0.0.1", hashed with SHA-256.

    Args:
        ip_prefix: Network in CIDR ("10.0.0.0/8") or dashed ("10.0.0.0-8") form
        ip_address: Host address

    Returns:
        32-byte ScopeId

    Raises:
        MalformedAddressError: If either part does not parse
    """
    try:
        network = ipaddress.ip_network(ip_prefix.strip().strip('/').replace('-', '/'), strict=False)
        address = ipaddress.ip_address(ip_address.strip())
    except (ValueError, AttributeError) as exc:
        raise MalformedAddressError(f"Malformed scope '{ip_prefix}' / '{ip_address}'") from exc
    canonical = f"/{network.network_address}-{network.prefixlen}/{address}"
    return ScopeId(hashlib.sha256(canonical.encode('utf-8')).digest())


@dataclass(frozen=True)
class Fid:
    """Resolved delivery path from source to destination NAP."""

    path: Tuple[NodeId, ...]

    @property
    def src(self) -> NodeId:
        return self.path[0]

    @property
    def dst(self) -> NodeId:
        return self.path[-1]

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def fid_for(graph: TopologyGraph, src: NodeId, dst: NodeId) -> Fid:
    """
    Shortest path from ``src`` to ``dst``.

    Among equal-length paths the lexicographically smallest node sequence
    wins: each step takes the smallest neighbor one hop closer to ``dst``.
    """
    for node in (src, dst):
        if not graph.has_node(node):
            raise ValueError(f"Node {node} is not in the graph")
    hops = hop_counts(graph)
    path: List[NodeId] = [src]
    current = src
    while current != dst:
        remaining = hops[current, dst]
        current = min(n for n in graph.neighbors(current) if hops[n, dst] == remaining - 1)
        path.append(current)
    return Fid(path=tuple(path))


def fid_table(graph: TopologyGraph, src: NodeId) -> Dict[NodeId, Fid]:
    """Every FID a NAP at ``src`` needs to reach any other access node."""
    return {dst: fid_for(graph, src, dst) for dst in graph.access_nodes}


def all_shortest_paths(graph: TopologyGraph, src: NodeId, dst: NodeId) -> List[List[NodeId]]:
    """Every shortest path, sorted; the first one equals ``fid_for``."""
    return sorted(nx.all_shortest_paths(graph.to_networkx(), src, dst))


@dataclass(frozen=True)
class MessageEvent:
    """One costed message between two nodes."""

    kind: MessageKind
    src: NodeId
    dst: NodeId
    hops: int
    bytes: int
    plane: Plane
    time: float = 0.0

    @property
    def hop_bytes(self) -> int:
        return self.hops * self.bytes

    def at(self, time: float) -> 'MessageEvent':
        return MessageEvent(self.kind, self.src, self.dst, self.hops, self.bytes, self.plane, time)


def message(graph: TopologyGraph, catalog: MessageCatalog, kind: MessageKind,
            src: NodeId, dst: NodeId) -> MessageEvent:
    """Cost a single ``kind`` message over the shortest path src to dst."""
    plane = Plane.DATA if kind in (MessageKind.DATA_PMIP, MessageKind.DATA_ICN) else Plane.CONTROL
    return MessageEvent(
        kind=kind,
        src=src,
        dst=dst,
        hops=hop_counts(graph)[src, dst],
        bytes=catalog.size(kind),
        plane=plane,
    )


@dataclass(frozen=True)
class HandoverTrace:
    """Ordered message events of one protocol procedure."""

    events: Tuple[MessageEvent, ...]
    latency_units: float = 0.0

    @property
    def signaling_hop_bytes(self) -> int:
        return sum(e.hop_bytes for e in self.events if e.plane is Plane.CONTROL)

    @property
    def data_hop_bytes(self) -> int:
        return sum(e.hop_bytes for e in self.events if e.plane is Plane.DATA)

    @property
    def kinds(self) -> List[MessageKind]:
        return [e.kind for e in self.events]

    def __len__(self) -> int:
        return len(self.events)
