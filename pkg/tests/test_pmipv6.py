"""
Tests for pmipv6 module.
"""

import numpy as np
import pytest

from mobisim.errors import AlreadyBoundError, InvalidMagError, NotBoundError, SameMagError
from mobisim.messages import MessageKind, Plane
from mobisim.pmipv6 import PmipDomain, pmip_latency
from mobisim.topology import fig4_shape, hop_counts


def test_attach_registers_binding(paper_graph):
    """Test the first attachment sends PBU and PBA and opens a tunnel."""
    domain = PmipDomain(paper_graph)
    trace = domain.attach("mn", 0)
    assert trace.kinds == [MessageKind.PBU, MessageKind.PBA]
    assert trace.signaling_hop_bytes == 3 * 152
    assert domain.binding_cache == {"mn": 0}
    assert domain.tunnels == {(9, 0)}


def test_attach_twice_fails(paper_graph):
    """Test a bound MN cannot attach again."""
    domain = PmipDomain(paper_graph)
    domain.attach("mn", 0)
    with pytest.raises(AlreadyBoundError):
        domain.attach("mn", 1)


def test_attach_at_lma_fails(paper_graph):
    """Test the LMA and non-access nodes are not MAGs."""
    domain = PmipDomain(paper_graph)
    with pytest.raises(InvalidMagError):
        domain.attach("mn", paper_graph.anchor)


def test_handover_message_sequence(paper_graph):
    """Test a handover deregisters at the old MAG and registers at the new one."""
    domain = PmipDomain(paper_graph)
    domain.attach("mn", 0)
    trace = domain.handover("mn", 0, 1)
    assert trace.kinds == [MessageKind.PBU, MessageKind.PBA, MessageKind.PBU, MessageKind.PBA]
    assert [(e.src, e.dst) for e in trace.events] == [(0, 9), (9, 0), (1, 9), (9, 1)]
    assert all(e.plane is Plane.CONTROL for e in trace.events)
    # (L_u + L_a)(h_ka + h_ja) with h_0a = 3 and h_1a = 2
    assert trace.signaling_hop_bytes == 152 * 5
    assert domain.binding_cache["mn"] == 1
    assert domain.tunnels == {(9, 1)}


def test_handover_latency(paper_graph):
    """Test T_c = 5p + m·h_ka + 2m·h_ja."""
    domain = PmipDomain(paper_graph, p=2.0, m=0.5)
    domain.attach("mn", 0)
    trace = domain.handover("mn", 0, 1)
    assert trace.latency_units == pytest.approx(5 * 2.0 + 0.5 * 3 + 2 * 0.5 * 2)
    assert pmip_latency(1, 1) == 8


def test_handover_errors(paper_graph):
    """Test handovers from the wrong MAG or to the same MAG fail."""
    domain = PmipDomain(paper_graph)
    with pytest.raises(NotBoundError):
        domain.handover("mn", 0, 1)
    domain.attach("mn", 0)
    with pytest.raises(NotBoundError):
        domain.handover("mn", 4, 1)
    with pytest.raises(SameMagError):
        domain.handover("mn", 0, 0)


def test_tunnel_shared_by_two_mns(paper_graph):
    """Test a tunnel stays up while any MN is bound at its MAG."""
    domain = PmipDomain(paper_graph)
    domain.attach("a", 4)
    domain.attach("b", 4)
    domain.handover("a", 4, 5)
    assert domain.tunnels == {(9, 4), (9, 5)}
    domain.detach("b")
    assert domain.tunnels == {(9, 5)}


def test_detach_unknown_mn(paper_graph):
    """Test detaching an unbound MN fails."""
    with pytest.raises(NotBoundError):
        PmipDomain(paper_graph).detach("ghost")


def test_delivery_goes_through_anchor(paper_graph):
    """Test each packet crosses CN to LMA and LMA to the serving MAG."""
    domain = PmipDomain(paper_graph)
    domain.attach("mn", 0)
    legs = domain.deliver_packet(3, "mn")
    assert [(e.src, e.dst) for e in legs] == [(3, 9), (9, 0)]
    assert sum(e.hop_bytes for e in legs) == (3 + 3) * 1064


def test_delivery_uplink_doubles(paper_graph):
    """Test uplink accounting adds the reverse legs."""
    domain = PmipDomain(paper_graph)
    domain.attach("mn", 0)
    down = sum(e.hop_bytes for e in domain.deliver_packet(3, "mn"))
    both = sum(e.hop_bytes for e in domain.deliver_packet(3, "mn", uplink=True))
    assert both == 2 * down


def test_delivery_payload_override(paper_graph):
    """Test a packet can carry a payload other than the catalog default."""
    domain = PmipDomain(paper_graph)
    domain.attach("mn", 0)
    legs = domain.deliver_packet(3, "mn", payload_bytes=500)
    assert [e.bytes for e in legs] == [540, 540]
    assert sum(e.hop_bytes for e in legs) == (3 + 3) * 540
    assert domain.deliver_packet(3, "mn")[0].bytes == 1064


def test_delivery_unbound(paper_graph):
    """Test delivery to an unbound MN fails."""
    with pytest.raises(NotBoundError):
        PmipDomain(paper_graph).deliver_packet(3, "mn")


def test_route_shape_anchored_hops():
    """Test anchored delivery crosses four hops on the first route shape."""
    shape = fig4_shape("a")
    domain = PmipDomain(shape.graph)
    domain.attach("mn", shape.mn_nap)
    legs = domain.deliver_packet(shape.cn_nap, "mn")
    assert sum(e.hops for e in legs) == 4
    assert hop_counts(shape.graph)[shape.cn_nap, shape.mn_nap] == 2


def test_random_operations_keep_one_binding_per_mn(paper_graph):
    """Test attach, handover and detach in random order keep one binding per MN."""
    rng = np.random.default_rng(17)
    domain = PmipDomain(paper_graph)
    mags = list(paper_graph.access_nodes)
    expected = {}
    for _ in range(2000):
        mn = f"mn{rng.integers(6)}"
        if mn not in expected:
            mag = int(rng.choice(mags))
            domain.attach(mn, mag)
            expected[mn] = mag
        elif rng.random() < 0.1:
            domain.detach(mn)
            del expected[mn]
        else:
            target = int(rng.choice([m for m in mags if m != expected[mn]]))
            domain.handover(mn, expected[mn], target)
            expected[mn] = target
        assert domain.binding_cache == expected
        assert domain.tunnels == {(domain.lma, mag) for mag in expected.values()}
