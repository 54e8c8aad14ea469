"""
Result export module.
Writes analytic reports, replication results, summaries, traces, eCDFs,
topologies and run manifests as CSV or JSON.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from mobisim.analytic import CostReport
from mobisim.messages import Scheme
from mobisim.sim_engine import METRICS, Comparison, ReplicationResult, ScenarioResult, TraceRow
from mobisim.stats import Ecdf, SummaryStat
from mobisim.topology import TopologyGraph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

COST_FIELDS = [
    'scheme', 'signaling_hbps', 'delivery_hbps', 'total_hbps', 'mean_latency',
    'signaling_ratio', 'delivery_ratio', 'total_ratio',
]
REPLICATION_FIELDS = [
    'replication', 'scheme', 'signaling_hb', 'delivery_hb', 'setup_hb', 'total_hb',
    'handovers', 'mean_latency',
]
SUMMARY_FIELDS = ['scheme', 'metric', 'n', 'mean', 'std', 'ci95_low', 'ci95_high', 'analytic']
TRACE_FIELDS = ['time', 'scheme', 'kind', 'from', 'to', 'hops', 'bytes', 'plane']
COMPARISON_FIELDS = [
    'size', 'metric', 'pmip_mean', 'pmip_ci95_low', 'pmip_ci95_high',
    'icn_mean', 'icn_ci95_low', 'icn_ci95_high', 'ratio',
]
SWEEP_FIELDS = ['speed_mph', 'scheme', 'metric', 'n', 'mean', 'ci95_low', 'ci95_high']

# matrices and vectors for external cross-checking
SIGNIFICANT_DIGITS = 12


def _write_rows(filepath: PathLike, fieldnames: List[str], rows: Iterable[Dict[str, Any]]) -> bool:
    try:
        with open(filepath, 'w', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames)
            writer.writeheader()
            for row in rows:
                writer.writerow(row)
    except (IOError, OSError) as exc:
        logger.error("Cannot write %s: %s", filepath, exc)
        return False
    logger.debug("Wrote %s", filepath)
    return True


def _ratio(value: float, reference: Optional[float]) -> Any:
    if reference is None or reference == 0:
        return ''
    return value / reference


def write_costs_csv(reports: Dict[Scheme, CostReport], filepath: PathLike) -> bool:
    """
    Write one row per scheme with its cost components in hops·bytes/s.

    Ratio columns are relative to PMIPv6 and left empty without a PMIP row.

    Args:
        reports: CostReport per scheme
        filepath: Path to output file

    Returns:
        True if successful, False otherwise
    """
    pmip = reports.get(Scheme.PMIP)
    rows = []
    for scheme, report in reports.items():
        rows.append({
            'scheme': scheme.value,
            'signaling_hbps': report.signaling,
            'delivery_hbps': report.delivery,
            'total_hbps': report.total,
            'mean_latency': report.mean_latency(),
            'signaling_ratio': _ratio(report.signaling, pmip.signaling if pmip else None),
            'delivery_ratio': _ratio(report.delivery, pmip.delivery if pmip else None),
            'total_ratio': _ratio(report.total, pmip.total if pmip else None),
        })
    return _write_rows(filepath, COST_FIELDS, rows)


def write_latency_histogram_csv(distribution: Sequence[Tuple[float, float]],
                                filepath: PathLike) -> bool:
    """Write (latency, probability) pairs of an analytic latency distribution."""
    return _write_rows(
        filepath,
        ['latency', 'probability'],
        ({'latency': value, 'probability': weight} for value, weight in distribution),
    )


def write_replications_csv(results: Sequence[ReplicationResult], filepath: PathLike) -> bool:
    """
    Write one row per replication and scheme.

    Args:
        results: Replication results in index order
        filepath: Path to output file

    Returns:
        True if successful, False otherwise
    """
    rows = []
    for result in results:
        for scheme, acc in result.schemes.items():
            latency = acc.mean_latency
            rows.append({
                'replication': result.replication,
                'scheme': scheme.value,
                'signaling_hb': acc.signaling_cost,
                'delivery_hb': acc.delivery_cost,
                'setup_hb': acc.setup_signaling,
                'total_hb': acc.total_cost,
                'handovers': acc.handover_count,
                'mean_latency': '' if latency is None else latency,
            })
    return _write_rows(filepath, REPLICATION_FIELDS, rows)


def write_summary_csv(aggregate: Dict[Scheme, Dict[str, SummaryStat]], filepath: PathLike,
                      analytic: Optional[Dict[Scheme, Dict[str, float]]] = None) -> bool:
    """
    Write the mean and 95% confidence interval of every metric.

    Args:
        aggregate: SummaryStat per scheme and metric
        filepath: Path to output file
        analytic: Expected value per scheme and metric, written alongside when known

    Returns:
        True if successful, False otherwise
    """
    rows = []
    for scheme, metrics in aggregate.items():
        for metric in METRICS:
            if metric not in metrics:
                continue
            stat = metrics[metric]
            expected = (analytic or {}).get(scheme, {}).get(metric)
            rows.append({
                'scheme': scheme.value,
                'metric': metric,
                'n': stat.n,
                'mean': stat.mean,
                'std': stat.sample_std,
                'ci95_low': stat.ci95_low,
                'ci95_high': stat.ci95_high,
                'analytic': '' if expected is None else expected,
            })
    return _write_rows(filepath, SUMMARY_FIELDS, rows)


def write_latency_samples_csv(samples: Sequence[float], filepath: PathLike) -> bool:
    """Write every handover latency sample of one scheme, one per row."""
    return _write_rows(filepath, ['latency'], ({'latency': x} for x in samples))


def write_ecdf_csv(distribution: Ecdf, filepath: PathLike) -> bool:
    """Write an empirical CDF as (value, fraction) steps."""
    return _write_rows(
        filepath,
        ['value', 'fraction'],
        ({'value': v, 'fraction': f} for v, f in distribution.points()),
    )


def write_trace_csv(trace: Sequence[TraceRow], filepath: PathLike) -> bool:
    """
    Write a costed message trace.

    Data rows carry the bytes of every packet delivered over the interval.
    """
    return _write_rows(
        filepath,
        TRACE_FIELDS,
        (
            {
                'time': row.time,
                'scheme': row.scheme.value,
                'kind': row.kind,
                'from': row.src,
                'to': row.dst,
                'hops': row.hops,
                'bytes': row.bytes,
                'plane': row.plane,
            }
            for row in trace
        ),
    )


def write_comparison_csv(comparisons: Sequence[Tuple[Any, Comparison]], filepath: PathLike) -> bool:
    """
    Write paired PMIP/ICN comparisons, one row per size and metric.

    Args:
        comparisons: (size label, Comparison) pairs
        filepath: Path to output file

    Returns:
        True if successful, False otherwise
    """
    rows = []
    for size, comparison in comparisons:
        for row in comparison.rows:
            rows.append({
                'size': size,
                'metric': row.metric,
                'pmip_mean': row.pmip.mean,
                'pmip_ci95_low': row.pmip.ci95_low,
                'pmip_ci95_high': row.pmip.ci95_high,
                'icn_mean': row.icn.mean,
                'icn_ci95_low': row.icn.ci95_low,
                'icn_ci95_high': row.icn.ci95_high,
                'ratio': row.ratio,
            })
    return _write_rows(filepath, COMPARISON_FIELDS, rows)


def write_sweep_csv(points: Sequence[Tuple[float, ScenarioResult]], filepath: PathLike) -> bool:
    """Write the aggregate of every speed-sweep point, tagged with its speed."""
    rows = []
    for speed, result in points:
        for scheme, metrics in result.aggregate.items():
            for metric in METRICS:
                if metric not in metrics:
                    continue
                stat = metrics[metric]
                rows.append({
                    'speed_mph': speed,
                    'scheme': scheme.value,
                    'metric': metric,
                    'n': stat.n,
                    'mean': stat.mean,
                    'ci95_low': stat.ci95_low,
                    'ci95_high': stat.ci95_high,
                })
    return _write_rows(filepath, SWEEP_FIELDS, rows)


def _format(value: float) -> str:
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def write_matrix_csv(matrix: np.ndarray, filepath: PathLike,
                     labels: Optional[Sequence[Any]] = None) -> bool:
    """
    Write a matrix row-major with 12 significant digits.

    With ``labels`` a header row and a leading label column are added.
    """
    data = np.atleast_2d(np.asarray(matrix, dtype=float))
    try:
        with open(filepath, 'w', newline='') as f:
            writer = csv.writer(f)
            if labels is not None:
                writer.writerow([''] + list(labels))
            for i, row in enumerate(data):
                cells = [_format(x) for x in row]
                writer.writerow(([labels[i]] if labels is not None else []) + cells)
        return True
    except (IOError, OSError) as exc:
        logger.error("Cannot write %s: %s", filepath, exc)
        return False


def write_vector_csv(vector: Sequence[float], filepath: PathLike,
                     labels: Optional[Sequence[Any]] = None) -> bool:
    """Write a vector as (node, value) rows with 12 significant digits."""
    names = list(labels) if labels is not None else list(range(len(vector)))
    return _write_rows(
        filepath,
        ['node', 'value'],
        ({'node': n, 'value': _format(float(v))} for n, v in zip(names, vector)),
    )


def write_topology_json(graph: TopologyGraph, filepath: PathLike) -> bool:
    """
    Export a topology in the importable JSON form.

    Returns:
        True if successful, False otherwise
    """
    return write_json(graph.to_dict(), filepath)


def write_json(data: Dict[str, Any], filepath: PathLike, pretty: bool = True) -> bool:
    try:
        with open(filepath, 'w') as f:
            json.dump(data, f, indent=2 if pretty else None, sort_keys=True)
            f.write('\n')
    except (IOError, OSError, TypeError) as exc:
        logger.error("Cannot write %s: %s", filepath, exc)
        return False
    logger.debug("Wrote %s", filepath)
    return True
