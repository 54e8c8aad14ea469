"""
Tests for result_export module.
"""

import csv
import json

import numpy as np
import pytest

from export.result_export import (
    write_comparison_csv,
    write_costs_csv,
    write_ecdf_csv,
    write_json,
    write_latency_histogram_csv,
    write_matrix_csv,
    write_replications_csv,
    write_summary_csv,
    write_sweep_csv,
    write_trace_csv,
    write_vector_csv,
)
from mobisim.analytic import TrafficModel, analyze
from mobisim.messages import Scheme
from mobisim.sim_engine import ScenarioConfig, compare_schemes, run_replication, run_scenario
from mobisim.stats import ecdf, summarize


def read_rows(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


@pytest.fixture
def reports(paper_graph, paper_chain):
    matrix, pi = paper_chain
    return analyze(paper_graph, matrix, pi, 0.04, TrafficModel(), cn_nap=3)


@pytest.fixture
def scenario(small_scenario):
    small_scenario['replications'] = 2
    return ScenarioConfig.from_dict(small_scenario)


def test_write_costs_csv(tmp_path, reports):
    """Test one row per scheme with ratios relative to PMIP."""
    path = tmp_path / "costs.csv"
    assert write_costs_csv(reports, path) is True
    rows = read_rows(path)
    assert [row['scheme'] for row in rows] == ['PMIP', 'ICN']
    icn = rows[1]
    assert float(icn['total_hbps']) == pytest.approx(reports[Scheme.ICN].total)
    assert float(icn['delivery_ratio']) == pytest.approx(
        reports[Scheme.ICN].delivery / reports[Scheme.PMIP].delivery)


def test_write_costs_csv_failure(tmp_path, reports):
    """Test an unwritable path returns False."""
    assert write_costs_csv(reports, tmp_path / "missing" / "costs.csv") is False


def test_write_latency_histogram_csv(tmp_path, reports):
    """Test the histogram probabilities sum to one."""
    path = tmp_path / "hist.csv"
    assert write_latency_histogram_csv(reports[Scheme.PMIP].latency_distribution, path)
    rows = read_rows(path)
    assert sum(float(row['probability']) for row in rows) == pytest.approx(1.0)


def test_write_replications_csv(tmp_path, scenario):
    """Test one row per replication and scheme."""
    results = [run_replication(scenario, i) for i in range(2)]
    path = tmp_path / "reps.csv"
    assert write_replications_csv(results, path)
    rows = read_rows(path)
    assert [(row['replication'], row['scheme']) for row in rows] == [
        ('0', 'PMIP'), ('0', 'ICN'), ('1', 'PMIP'), ('1', 'ICN'),
    ]
    first = rows[0]
    assert float(first['total_hb']) == pytest.approx(
        float(first['signaling_hb']) + float(first['delivery_hb']))


def test_write_summary_csv_with_analytic(tmp_path):
    """Test analytic values are written next to the matching metric only."""
    aggregate = {Scheme.ICN: {'total': summarize([1.0, 3.0]), 'handovers': summarize([4.0, 4.0])}}
    path = tmp_path / "summary.csv"
    assert write_summary_csv(aggregate, path, analytic={Scheme.ICN: {'total': 2.5}})
    rows = {row['metric']: row for row in read_rows(path)}
    assert float(rows['total']['analytic']) == 2.5
    assert rows['handovers']['analytic'] == ''
    assert float(rows['handovers']['std']) == 0.0


def test_write_ecdf_csv(tmp_path):
    """Test eCDF steps end at one."""
    path = tmp_path / "ecdf.csv"
    assert write_ecdf_csv(ecdf([8.0, 9.0, 9.0, 12.0]), path)
    rows = read_rows(path)
    assert [row['value'] for row in rows] == ['8.0', '9.0', '12.0']
    assert float(rows[-1]['fraction']) == 1.0


def test_write_trace_csv(tmp_path, scenario):
    """Test the trace carries both schemes' messages."""
    result = run_replication(scenario, 0, record=True)
    path = tmp_path / "trace.csv"
    assert write_trace_csv(result.trace, path)
    rows = read_rows(path)
    assert len(rows) == len(result.trace)
    assert {row['scheme'] for row in rows} == {'PMIP', 'ICN'}
    assert {row['plane'] for row in rows} == {'CONTROL', 'DATA'}


def test_write_comparison_and_sweep_csv(tmp_path, scenario):
    """Test comparison and sweep tables tag rows with size and speed."""
    comparison = compare_schemes(scenario, threads=1)
    path = tmp_path / "comparison.csv"
    assert write_comparison_csv([(9, comparison)], path)
    rows = read_rows(path)
    assert {row['size'] for row in rows} == {'9'}
    assert len(rows) == len(comparison.rows)

    result = run_scenario(scenario, threads=1)
    path = tmp_path / "sweep.csv"
    assert write_sweep_csv([(70.0, result)], path)
    rows = read_rows(path)
    assert {row['speed_mph'] for row in rows} == {'70.0'}
    assert {row['scheme'] for row in rows} == {'PMIP', 'ICN'}


def test_write_matrix_csv(tmp_path, paper_chain):
    """Test matrices round to 12 significant digits and keep labels."""
    matrix, _ = paper_chain
    path = tmp_path / "matrix.csv"
    assert write_matrix_csv(matrix.p, path, labels=matrix.nodes)
    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    assert rows[0] == [''] + [str(n) for n in matrix.nodes]
    values = np.array([[float(x) for x in row[1:]] for row in rows[1:]])
    assert values.sum(axis=1) == pytest.approx(np.ones(len(matrix.nodes)), abs=1e-11)
    assert rows[1][1] == f"{matrix.p[0, 0]:.12g}"


def test_write_vector_csv(tmp_path):
    """Test vectors default to positional labels."""
    path = tmp_path / "vector.csv"
    assert write_vector_csv([0.25, 0.75], path)
    assert read_rows(path) == [{'node': '0', 'value': '0.25'}, {'node': '1', 'value': '0.75'}]


def test_write_json(tmp_path):
    """Test JSON output is sorted and newline-terminated."""
    path = tmp_path / "data.json"
    assert write_json({'b': 1, 'a': [1, 2]}, path)
    text = path.read_text()
    assert text.endswith('\n')
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {'a': [1, 2], 'b': 1}


def test_write_json_unserializable(tmp_path):
    """Test values JSON cannot encode give False."""
    assert write_json({'x': object()}, tmp_path / "bad.json") is False
