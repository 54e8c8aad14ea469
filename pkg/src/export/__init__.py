"""
Export functionality for mobisim results.

This package writes analytic reports, replication results, summaries,
traces, eCDFs, topologies and run manifests as CSV or JSON.
"""

from export.result_export import (
    write_comparison_csv,
    write_costs_csv,
    write_ecdf_csv,
    write_json,
    write_latency_histogram_csv,
    write_latency_samples_csv,
    write_matrix_csv,
    write_replications_csv,
    write_summary_csv,
    write_sweep_csv,
    write_topology_json,
    write_trace_csv,
    write_vector_csv,
)

__all__ = [
    "write_comparison_csv",
    "write_costs_csv",
    "write_ecdf_csv",
    "write_json",
    "write_latency_histogram_csv",
    "write_latency_samples_csv",
    "write_matrix_csv",
    "write_replications_csv",
    "write_summary_csv",
    "write_sweep_csv",
    "write_topology_json",
    "write_trace_csv",
    "write_vector_csv",
]
