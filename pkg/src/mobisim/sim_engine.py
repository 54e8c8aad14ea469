"""
Discrete-event mobility simulator.

Mobile nodes random-walk over the access network while a static
correspondent streams packets to each of them. Every cell change runs the
handover of each simulated scheme over the same move, every dwell interval
is charged for the packets delivered during it, and replications are
aggregated into means with 95% confidence intervals.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import simpy

from imports.topology_import import load_topology
from mobisim.analytic import RANDOM_CN, CnPlacement, CostReport, TrafficModel, analyze
from mobisim.errors import ConfigInvalidError
from mobisim.ipoicn import IcnDomain
from mobisim.messages import MessageCatalog, MessageEvent, Scheme
from mobisim.mobility import (
    Convention,
    DirectionMatrix,
    Residence,
    StationaryVector,
    Trajectory,
    direction_matrix,
    mobility_rate,
    mph_to_mps,
    sample_trajectory,
    stationary,
)
from mobisim.pmipv6 import PmipDomain
from mobisim.stats import SummaryStat, summarize
from mobisim.topology import (
    DEFAULT_CELL_RADIUS_M,
    PAPER_FIXTURE_ANCHOR_ATTACH,
    Connectivity,
    NodeId,
    TopologyGraph,
    default_area_side,
    fixture,
    fixture_paper_topology,
    hop_counts,
    radius_for_mean_degree,
    random_geometric,
)
from utils.config_manager import DEFAULT_CONFIG, merge_configs, validate_config

logger = logging.getLogger(__name__)

THREADS_ENV = "MOBISIM_THREADS"
METRICS = ('signaling', 'delivery', 'total', 'handovers', 'mean_latency')


class Stream(IntEnum):
    MOBILITY = 0
    TRAFFIC = 1
    PLACEMENT = 2


def stream(seed: int, replication: int, mn: int, purpose: Stream) -> np.random.Generator:
    """Independent random stream for one (replication, MN, purpose)."""
    return np.random.default_rng(np.random.SeedSequence([seed, replication, mn, int(purpose)]))


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return max(os.cpu_count() or 1, 1)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigInvalidError(f"{THREADS_ENV} must be an integer, got '{raw}'") from None
    return max(value, 1)


@dataclass(frozen=True)
class SpeedSpec:
    """Node speed in miles/hour, fixed or drawn uniformly per MN and replication."""

    low_mph: float = 70.0
    high_mph: float = 70.0

    @property
    def is_fixed(self) -> bool:
        return self.low_mph == self.high_mph

    @property
    def mean_mph(self) -> float:
        return (self.low_mph + self.high_mph) / 2.0

    def draw_mps(self, rng: np.random.Generator) -> float:
        if self.is_fixed:
            return mph_to_mps(self.low_mph)
        return mph_to_mps(float(rng.uniform(self.low_mph, self.high_mph)))

    @classmethod
    def from_config(cls, value: Any) -> 'SpeedSpec':
        if isinstance(value, dict) and 'uniform' in value:
            low, high = value['uniform']
            return cls(float(low), float(high))
        if isinstance(value, dict):
            value = value['fixed']
        return cls(float(value), float(value))

    def to_config(self) -> Any:
        if self.is_fixed:
            return self.low_mph
        return {'uniform': [self.low_mph, self.high_mph]}


@dataclass(frozen=True)
class TopologySpec:
    """Where the access network comes from: a fixture, a JSON file or a random geometric draw."""

    fixture: Optional[str] = "paper-fig5"
    path: Optional[str] = None
    nodes: int = 100
    mean_degree: float = 4.0
    connection_radius: Optional[float] = None
    connectivity: Connectivity = Connectivity.BRIDGE
    seed: int = 1
    anchor_attach: Optional[NodeId] = None
    anchor_link_hops: int = 1
    cell_radius: float = DEFAULT_CELL_RADIUS_M

    def build(self) -> TopologyGraph:
        if self.path is not None:
            return load_topology(self.path)
        if self.fixture == "paper-fig5":
            attach = PAPER_FIXTURE_ANCHOR_ATTACH if self.anchor_attach is None else self.anchor_attach
            return fixture_paper_topology(attach, self.anchor_link_hops)
        if self.fixture is not None:
            return fixture(self.fixture)
        side = default_area_side(self.nodes, self.cell_radius)
        radius = self.connection_radius or radius_for_mean_degree(self.nodes, self.mean_degree, side)
        return random_geometric(
            self.nodes,
            radius,
            area=(side, side),
            seed=self.seed,
            cell_radius=self.cell_radius,
            anchor_link_hops=self.anchor_link_hops,
            connectivity=self.connectivity,
        )

    def to_config(self) -> Dict[str, Any]:
        return {
            'fixture': self.fixture,
            'path': self.path,
            'nodes': self.nodes,
            'mean_degree': self.mean_degree,
            'connection_radius_m': self.connection_radius,
            'connectivity': self.connectivity.value,
            'seed': self.seed,
            'anchor_attach': self.anchor_attach,
            'anchor_link_hops': self.anchor_link_hops,
            'cell_radius_m': self.cell_radius,
        }


@dataclass(frozen=True)
class ScenarioConfig:
    topology: TopologySpec = field(default_factory=TopologySpec)
    scheme: Scheme = Scheme.BOTH
    num_mns: int = 1
    speed: SpeedSpec = field(default_factory=SpeedSpec)
    mu_override: Optional[float] = None
    traffic: TrafficModel = field(default_factory=TrafficModel)
    duration: float = 1800.0
    replications: int = 20
    seed: int = 42
    latency_p: float = 1.0
    latency_m: float = 1.0
    catalog: MessageCatalog = field(default_factory=MessageCatalog)
    convention: Convention = Convention.WITH_SELF_LOOP
    residence: Residence = Residence.EXPONENTIAL
    warmup: float = 0.0
    attach_delay: float = 0.0
    cn_nap: CnPlacement = RANDOM_CN
    speeds_sweep: Tuple[float, ...] = ()
    sizes_sweep: Tuple[int, ...] = ()

    @property
    def schemes(self) -> List[Scheme]:
        return [Scheme.PMIP, Scheme.ICN] if self.scheme is Scheme.BOTH else [self.scheme]

    @property
    def measured_time(self) -> float:
        return self.duration - self.warmup

    @classmethod
    def from_dict(cls, config: Dict[str, Any]) -> 'ScenarioConfig':
        """
        Build the typed scenario from a configuration dictionary.

        Missing keys take their defaults.

        Raises:
            ConfigInvalidError: If validation fails
        """
        merged = merge_configs(DEFAULT_CONFIG, config)
        is_valid, error = validate_config(merged)
        if not is_valid:
            raise ConfigInvalidError(error)
        topo = merged['topology']
        traffic = merged['traffic']
        catalog = MessageCatalog.from_config(merged['catalog'])
        return cls(
            topology=TopologySpec(
                fixture=topo.get('fixture'),
                path=topo.get('path'),
                nodes=topo['nodes'],
                mean_degree=float(topo['mean_degree']),
                connection_radius=topo.get('connection_radius_m'),
                connectivity=Connectivity(topo['connectivity']),
                seed=topo['seed'],
                anchor_attach=topo.get('anchor_attach'),
                anchor_link_hops=topo['anchor_link_hops'],
                cell_radius=float(topo['cell_radius_m']),
            ),
            scheme=Scheme(merged['scheme']),
            num_mns=merged['num_mns'],
            speed=SpeedSpec.from_config(merged['speed_mph']),
            mu_override=merged['mobility'].get('mu'),
            traffic=TrafficModel(
                bit_rate=float(traffic['bit_rate_bps']),
                payload_bytes=catalog.payload_bytes,
                arrivals=traffic['arrivals'],
                uplink=traffic['uplink'],
            ),
            duration=float(merged['duration_s']),
            replications=merged['replications'],
            seed=merged['seed'],
            latency_p=float(merged['latency']['p']),
            latency_m=float(merged['latency']['m']),
            catalog=catalog,
            convention=Convention(merged['mobility']['convention']),
            residence=Residence(merged['mobility']['residence']),
            warmup=float(merged['warmup_s']),
            attach_delay=float(merged['attach_delay_s']),
            cn_nap=merged['cn_nap'],
            speeds_sweep=tuple(float(s) for s in merged['sweep']['speeds_mph']),
            sizes_sweep=tuple(merged['sweep']['sizes']),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'topology': self.topology.to_config(),
            'scheme': self.scheme.value,
            'num_mns': self.num_mns,
            'speed_mph': self.speed.to_config(),
            'mobility': {
                'convention': self.convention.value,
                'residence': self.residence.value,
                'mu': self.mu_override,
            },
            'traffic': {
                'bit_rate_bps': self.traffic.bit_rate,
                'arrivals': self.traffic.arrivals,
                'uplink': self.traffic.uplink,
            },
            'cn_nap': self.cn_nap,
            'duration_s': self.duration,
            'warmup_s': self.warmup,
            'attach_delay_s': self.attach_delay,
            'replications': self.replications,
            'seed': self.seed,
            'latency': {'p': self.latency_p, 'm': self.latency_m},
            'catalog': self.catalog.to_config(),
            'sweep': {
                'speeds_mph': list(self.speeds_sweep),
                'sizes': list(self.sizes_sweep),
            },
        }

    def with_speed(self, mph: float) -> 'ScenarioConfig':
        return replace(self, speed=SpeedSpec(mph, mph))

    def with_size(self, nodes: int) -> 'ScenarioConfig':
        return replace(self, topology=replace(self.topology, fixture=None, path=None, nodes=nodes))


class EventKind(IntEnum):
    """Processing order among events at the same instant."""

    PACKET = 0
    MOVE = 1
    END = 2


@dataclass(frozen=True, order=True)
class SimEvent:
    time: float
    kind: EventKind
    seq: int
    mn: Optional[int] = field(default=None, compare=False)


class TraceRow(NamedTuple):
    time: float
    scheme: Scheme
    kind: str
    src: NodeId
    dst: NodeId
    hops: int
    bytes: float
    plane: str


@dataclass
class SchemeResult:
    scheme: Scheme
    signaling_cost: float = 0.0
    delivery_cost: float = 0.0
    setup_signaling: float = 0.0
    handover_count: int = 0
    latency_samples: List[float] = field(default_factory=list)

    @property
    def total_cost(self) -> float:
        return self.signaling_cost + self.delivery_cost

    @property
    def mean_latency(self) -> Optional[float]:
        if not self.latency_samples:
            return None
        return float(np.mean(self.latency_samples))


@dataclass
class ReplicationResult:
    replication: int
    seed: int
    schemes: Dict[Scheme, SchemeResult]
    handover_count: int = 0
    moves: List[Tuple[float, int, NodeId, NodeId]] = field(default_factory=list)
    events: List[SimEvent] = field(default_factory=list)
    trace: List[TraceRow] = field(default_factory=list)

    def __getitem__(self, scheme: Scheme) -> SchemeResult:
        return self.schemes[Scheme(scheme)]


@dataclass(frozen=True)
class ScenarioContext:
    """Everything replications share: the graph, its chain and hop counts."""

    config: ScenarioConfig
    graph: TopologyGraph
    matrix: DirectionMatrix
    pi: StationaryVector

    @classmethod
    def build(cls, config: ScenarioConfig, graph: Optional[TopologyGraph] = None) -> 'ScenarioContext':
        graph = graph or config.topology.build()
        if config.cn_nap != RANDOM_CN and not graph.is_access(config.cn_nap):
            raise ConfigInvalidError(f"cn_nap {config.cn_nap} is not an access node of '{graph.name}'")
        hop_counts(graph)
        matrix = direction_matrix(graph, config.convention)
        return cls(config=config, graph=graph, matrix=matrix, pi=stationary(matrix))


class _Replication:
    """One single-threaded simpy run over pre-sampled trajectories."""

    def __init__(self, context: ScenarioContext, index: int, record: bool):
        self.ctx = context
        self.config = context.config
        self.index = index
        self.record = record
        self.env = simpy.Environment()
        self.pmip: Optional[PmipDomain] = None
        self.icn: Optional[IcnDomain] = None
        config = self.config
        if Scheme.PMIP in config.schemes:
            self.pmip = PmipDomain(context.graph, config.catalog, config.latency_p, config.latency_m)
        if Scheme.ICN in config.schemes:
            self.icn = IcnDomain(context.graph, config.catalog, p=config.latency_p, m=config.latency_m)
        self.result = ReplicationResult(
            replication=index,
            seed=config.seed,
            schemes={s: SchemeResult(scheme=s) for s in config.schemes},
        )
        self._seq = 0

    def _event(self, kind: EventKind, mn: Optional[int] = None, time: Optional[float] = None) -> None:
        if self.record:
            at = self.env.now if time is None else time
            self.result.events.append(SimEvent(at, kind, self._seq, mn))
        self._seq += 1

    def _trace(self, scheme: Scheme, events: Sequence[MessageEvent], scale: float = 1.0) -> None:
        if not self.record:
            return
        for e in events:
            self.result.trace.append(TraceRow(
                self.env.now, scheme, e.kind.value, e.src, e.dst, e.hops, e.bytes * scale, e.plane.value,
            ))

    def _mu(self, rng: np.random.Generator) -> float:
        speed = self.config.speed.draw_mps(rng)
        if self.config.mu_override is not None:
            return self.config.mu_override
        return mobility_rate(speed, self.ctx.graph.cell_radius).mu

    def _setup(self, mn: int) -> Tuple[Trajectory, NodeId, np.random.Generator]:
        config = self.config
        mobility_rng = stream(config.seed, self.index, mn, Stream.MOBILITY)
        mu = self._mu(mobility_rng)
        trajectory = sample_trajectory(
            mobility_rng, self.ctx.graph, self.ctx.matrix, mu, config.duration,
            residence=config.residence,
        )
        if config.cn_nap == RANDOM_CN:
            placement_rng = stream(config.seed, self.index, mn, Stream.PLACEMENT)
            cn_nap = int(placement_rng.choice(self.ctx.graph.access_nodes))
        else:
            cn_nap = int(config.cn_nap)

        start = trajectory.visits[0].node
        if self.pmip is not None:
            trace = self.pmip.attach(mn, start)
            self.result.schemes[Scheme.PMIP].setup_signaling += trace.signaling_hop_bytes
            self._trace(Scheme.PMIP, trace.events)
        if self.icn is not None:
            cn = ('cn', mn)
            self.icn.register_cn(cn, cn_nap)
            self.icn.attach(mn, start)
            trace = self.icn.session_establish(mn, cn)
            self.result.schemes[Scheme.ICN].setup_signaling += trace.signaling_hop_bytes
            self._trace(Scheme.ICN, trace.events)
        return trajectory, cn_nap, stream(config.seed, self.index, mn, Stream.TRAFFIC)

    def _packets(self, mn: int, cn_nap: NodeId, start: float, end: float,
                 rng: np.random.Generator) -> None:
        traffic = self.config.traffic
        exposure = max(end - max(start, self.config.warmup), 0.0)
        expected = traffic.packet_rate * exposure
        count = float(rng.poisson(expected)) if traffic.arrivals == "poisson" else expected
        self._event(EventKind.PACKET, mn)
        if count == 0:
            return
        if self.pmip is not None:
            legs = self.pmip.deliver_packet(cn_nap, mn, uplink=traffic.uplink)
            self.result.schemes[Scheme.PMIP].delivery_cost += count * sum(e.hop_bytes for e in legs)
            self._trace(Scheme.PMIP, legs, count)
        if self.icn is not None:
            legs = self.icn.deliver_packet(mn, uplink=traffic.uplink)
            self.result.schemes[Scheme.ICN].delivery_cost += count * sum(e.hop_bytes for e in legs)
            self._trace(Scheme.ICN, legs, count)

    def _move(self, mn: int, k: NodeId, j: NodeId) -> None:
        self._event(EventKind.MOVE, mn)
        self.result.moves.append((self.env.now, mn, k, j))
        counted = self.env.now >= self.config.warmup
        if counted:
            self.result.handover_count += 1
        for scheme, domain in ((Scheme.PMIP, self.pmip), (Scheme.ICN, self.icn)):
            if domain is None:
                continue
            trace = domain.handover(mn, k, j)
            self._trace(scheme, trace.events)
            if counted:
                acc = self.result.schemes[scheme]
                acc.signaling_cost += trace.signaling_hop_bytes
                acc.handover_count += 1
                acc.latency_samples.append(trace.latency_units + self.config.attach_delay)

    def _mobile_node(self, mn: int, trajectory: Trajectory, cn_nap: NodeId,
                     traffic_rng: np.random.Generator) -> Iterator[simpy.Event]:
        duration = self.config.duration
        visits = trajectory.visits
        t = 0.0
        for i, visit in enumerate(visits):
            end = min(t + visit.dwell, duration)
            yield self.env.timeout(end - self.env.now)
            self._packets(mn, cn_nap, t, end, traffic_rng)
            if end >= duration or i + 1 == len(visits):
                return
            self._move(mn, visit.node, visits[i + 1].node)
            t = end

    def run(self) -> ReplicationResult:
        for mn in range(self.config.num_mns):
            trajectory, cn_nap, traffic_rng = self._setup(mn)
            self.env.process(self._mobile_node(mn, trajectory, cn_nap, traffic_rng))
        self.env.run()
        self._event(EventKind.END, time=self.config.duration)
        logger.debug("Replication %d finished: %d handovers", self.index, self.result.handover_count)
        return self.result


def run_replication(config: ScenarioConfig, replication_index: int,
                    context: Optional[ScenarioContext] = None,
                    record: bool = False) -> ReplicationResult:
    """
    Simulate one replication.

    Args:
        config: Scenario
        replication_index: Index mixed into every random stream
        context: Prebuilt shared state (built from ``config`` if omitted)
        record: Keep the event list and the costed message trace

    Returns:
        ReplicationResult, a pure function of (config, replication_index)
    """
    context = context or ScenarioContext.build(config)
    logger.debug("Replication %d of '%s' starting", replication_index, context.graph.name)
    return _Replication(context, replication_index, record).run()


def _metric(result: SchemeResult, metric: str) -> Optional[float]:
    if metric == 'signaling':
        return result.signaling_cost
    if metric == 'delivery':
        return result.delivery_cost
    if metric == 'total':
        return result.total_cost
    if metric == 'handovers':
        return float(result.handover_count)
    return result.mean_latency


def aggregate(results: Sequence[ReplicationResult],
              schemes: Sequence[Scheme]) -> Dict[Scheme, Dict[str, SummaryStat]]:
    """Mean and 95% CI of every metric across replications, per scheme."""
    summary: Dict[Scheme, Dict[str, SummaryStat]] = {}
    for scheme in schemes:
        summary[scheme] = {}
        for metric in METRICS:
            values = [_metric(r[scheme], metric) for r in results]
            present = [v for v in values if v is not None]
            if present:
                summary[scheme][metric] = summarize(present)
    return summary


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    context: ScenarioContext
    replications: List[ReplicationResult]
    aggregate: Dict[Scheme, Dict[str, SummaryStat]]

    @property
    def graph(self) -> TopologyGraph:
        return self.context.graph

    def latency_samples(self, scheme: Scheme) -> List[float]:
        return [x for r in self.replications for x in r[scheme].latency_samples]


def run_scenario(config: ScenarioConfig, threads: Optional[int] = None,
                 record_traces: bool = False,
                 graph: Optional[TopologyGraph] = None) -> ScenarioResult:
    """
    Run every replication and aggregate the results.

    Replications run on a thread pool capped by ``threads`` (or
    MOBISIM_THREADS) and are merged in index order.
    """
    context = ScenarioContext.build(config, graph)
    workers = min(threads or default_threads(), config.replications)
    logger.info("Running %d replications of %s on '%s' (%d MNs, %d threads)",
                config.replications, config.scheme.value, context.graph.name,
                config.num_mns, workers)

    def job(index: int) -> ReplicationResult:
        return run_replication(config, index, context, record=record_traces and index == 0)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(job, range(config.replications)))
    return ScenarioResult(
        config=config,
        context=context,
        replications=results,
        aggregate=aggregate(results, config.schemes),
    )


def analytic_mu(config: ScenarioConfig, graph: TopologyGraph) -> float:
    """Expected mobility rate of one MN; μ is linear in speed, so the mean speed gives it."""
    if config.mu_override is not None:
        return config.mu_override
    return mobility_rate(mph_to_mps(config.speed.mean_mph), graph.cell_radius).mu


def analytic_reports(config: ScenarioConfig,
                     context: Optional[ScenarioContext] = None) -> Dict[Scheme, CostReport]:
    """Closed-form per-MN costs for the scenario's topology, speed and traffic."""
    context = context or ScenarioContext.build(config)
    return analyze(
        context.graph,
        context.matrix,
        context.pi,
        analytic_mu(config, context.graph),
        config.traffic,
        config.catalog,
        cn_nap=config.cn_nap,
        scheme=config.scheme,
        p=config.latency_p,
        m=config.latency_m,
        attach_delay=config.attach_delay,
    )


@dataclass(frozen=True)
class ComparisonRow:
    metric: str
    pmip: SummaryStat
    icn: SummaryStat

    @property
    def ratio(self) -> float:
        """PMIP mean over ICN mean."""
        if self.icn.mean == 0:
            return math.inf if self.pmip.mean > 0 else math.nan
        return self.pmip.mean / self.icn.mean


@dataclass
class Comparison:
    rows: List[ComparisonRow]
    result: ScenarioResult
    handovers_equal: bool

    def row(self, metric: str) -> ComparisonRow:
        for r in self.rows:
            if r.metric == metric:
                return r
        raise KeyError(metric)

    @property
    def total_ratio(self) -> float:
        return self.row('total').ratio


def compare_schemes(config: ScenarioConfig, threads: Optional[int] = None,
                    graph: Optional[TopologyGraph] = None) -> Comparison:
    """
    Paired comparison of both schemes over identical moves and traffic.

    Raises:
        ConfigInvalidError: If the scenario does not simulate both schemes
    """
    if config.scheme is not Scheme.BOTH:
        raise ConfigInvalidError("compare needs scheme BOTH")
    result = run_scenario(config, threads=threads, graph=graph)
    pmip, icn = result.aggregate[Scheme.PMIP], result.aggregate[Scheme.ICN]
    rows = [ComparisonRow(metric, pmip[metric], icn[metric]) for metric in METRICS
            if metric in pmip and metric in icn]
    equal = all(r[Scheme.PMIP].handover_count == r[Scheme.ICN].handover_count
                for r in result.replications)
    return Comparison(rows=rows, result=result, handovers_equal=equal)


def sweep_speeds(config: ScenarioConfig, speeds_mph: Sequence[float],
                 threads: Optional[int] = None) -> List[Tuple[float, ScenarioResult]]:
    """One scenario per fixed speed, all on the same graph and seeds."""
    graph = config.topology.build()
    return [(mph, run_scenario(config.with_speed(mph), threads=threads, graph=graph))
            for mph in speeds_mph]


def sweep_sizes(config: ScenarioConfig, sizes: Sequence[int],
                threads: Optional[int] = None) -> List[Tuple[int, Comparison]]:
    """One paired comparison per random geometric network size."""
    return [(n, compare_schemes(config.with_size(n), threads=threads)) for n in sizes]


def expected_totals(reports: Dict[Scheme, CostReport], config: ScenarioConfig) -> Dict[Scheme, Dict[str, float]]:
    """Analytic costs scaled to the simulated horizon and MN count."""
    scale = config.measured_time * config.num_mns
    return {
        scheme: {
            'signaling': report.signaling * scale,
            'delivery': report.delivery * scale,
            'total': report.total * scale,
        }
        for scheme, report in reports.items()
    }
