"""
mobisim - mobility management cost simulator.

Compares anchored Proxy Mobile IPv6 with anchorless IP-over-ICN on the same
access networks, analytically and by discrete-event simulation:
- Topologies: fixtures, random geometric networks, JSON import
- Random-walk mobility with a stationary location distribution
- Signaling, packet delivery and handover latency costs
- Replicated simulation with confidence intervals and eCDFs
"""

__version__ = "1.0.0"

__all__ = ["__version__"]
