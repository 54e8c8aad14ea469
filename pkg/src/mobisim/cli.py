#!/usr/bin/env python3
"""
mobisim command line.
Analytic cost evaluation, replicated simulation, paired scheme comparison
and fixture listing, writing CSV and JSON artifacts.
"""

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

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
from imports.topology_import import list_presets, load_preset
from mobisim import __version__
from mobisim.analytic import CostReport
from mobisim.errors import (
    ArtifactWriteError,
    ConfigError,
    InconsistentResultError,
    MobisimError,
    UnknownPresetError,
)
from mobisim.messages import Scheme
from mobisim.sim_engine import (
    Comparison,
    ScenarioConfig,
    ScenarioContext,
    ScenarioResult,
    analytic_reports,
    compare_schemes,
    expected_totals,
    run_scenario,
    sweep_sizes,
    sweep_speeds,
)
from mobisim.stats import ecdf, ks_distance
from mobisim.topology import FIXTURES, fixture
from utils.config_manager import ConfigManager

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
SCHEME_CHOICES = ['PMIP', 'ICN', 'BOTH']


@dataclass
class RunManifest:
    """Everything needed to reproduce the files of one run."""

    command: str
    config: Dict[str, Any]
    seeds: Dict[str, Any]
    artifacts: List[str] = field(default_factory=list)
    version: str = __version__
    runtime_s: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class Artifacts:
    """Tracks the files a command writes so a failed run can remove them."""

    def __init__(self, out_dir: Path):
        self.out_dir = Path(out_dir)
        self.written: List[Path] = []
        self._created_dirs: List[Path] = []

    def _mkdir(self, directory: Path) -> None:
        missing = []
        while not directory.exists():
            missing.append(directory)
            directory = directory.parent
        for d in reversed(missing):
            d.mkdir()
            self._created_dirs.append(d)

    def write(self, name: str, writer: Callable[..., bool], *args: Any, **kwargs: Any) -> Path:
        path = self.out_dir / name
        self._mkdir(path.parent)
        # discard() must also see partially written files
        self.written.append(path)
        if not writer(*args, path, **kwargs):
            raise ArtifactWriteError(f"Cannot write {path}")
        logger.debug("Wrote %s", path)
        return path

    @property
    def names(self) -> List[str]:
        return [p.relative_to(self.out_dir).as_posix() for p in self.written]

    def discard(self) -> None:
        for path in self.written:
            path.unlink(missing_ok=True)
        for directory in reversed(self._created_dirs):
            try:
                directory.rmdir()
            except OSError:
                pass
        self.written = []


def load_scenario(config_ref: str, overrides: Dict[str, Any]) -> Tuple[ScenarioConfig, ConfigManager]:
    """
    Resolve CONFIG as a JSON file, a run manifest or a shipped preset name.

    Raises:
        ConfigError: If a file cannot be read
        UnknownPresetError: If the name is neither a file nor a preset
        ConfigInvalidError: If the merged configuration fails validation
    """
    path = Path(config_ref)
    if path.is_file() and path.name == MANIFEST_NAME:
        try:
            with open(path, 'r') as f:
                snapshot = json.load(f)['config']
        except (IOError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"Cannot read run manifest {path}: {exc}") from exc
        manager = ConfigManager(base=snapshot)
    elif path.is_file() or path.suffix == '.json':
        manager = ConfigManager(path, strict=True)
    elif config_ref in list_presets():
        manager = ConfigManager(base=load_preset(config_ref))
    else:
        raise UnknownPresetError(
            f"'{config_ref}' is neither a config file nor a preset "
            f"({', '.join(list_presets())})"
        )
    manager.apply_overrides(overrides)
    return ScenarioConfig.from_dict(manager.as_dict()), manager


def _seeds(scenario: ScenarioConfig) -> Dict[str, Any]:
    return {
        'base_seed': scenario.seed,
        'replications': scenario.replications,
        'topology_seed': scenario.topology.seed,
        'streams': 'SeedSequence([base_seed, replication, mn, purpose])',
    }


def _finish(artifacts: Artifacts, command: str, scenario: ScenarioConfig, started: float) -> None:
    manifest = RunManifest(
        command=command,
        config=scenario.to_dict(),
        seeds=_seeds(scenario),
        artifacts=artifacts.names,
        runtime_s=round(time.perf_counter() - started, 3),
    )
    artifacts.write(MANIFEST_NAME, write_json, manifest.to_dict())
    logger.info("Wrote %d artifacts to %s", len(artifacts.written), artifacts.out_dir)


def scenario_command(func: Callable) -> Callable:
    """Shared CONFIG argument, override flags and error handling."""

    @click.argument('config')
    @click.option('--out', '-o', 'out', default='results', type=click.Path(file_okay=False),
                  help='Output directory (default: results)')
    @click.option('--seed', type=int, help='Base seed')
    @click.option('--reps', type=int, help='Number of replications')
    @click.option('--duration', type=float, help='Simulated seconds per replication')
    @click.option('--scheme', type=click.Choice(SCHEME_CHOICES, case_sensitive=False),
                  help='Scheme(s) to evaluate')
    @click.pass_context
    @wraps(func)
    def wrapper(ctx, config, out, seed, reps, duration, scheme, **kwargs):
        overrides = {
            'seed': seed,
            'replications': reps,
            'duration_s': duration,
            'scheme': scheme.upper() if scheme else None,
        }
        artifacts = Artifacts(Path(out))
        try:
            scenario, _ = load_scenario(config, overrides)
            func(scenario, artifacts, **kwargs)
        except (MobisimError, ValueError, OSError) as exc:
            artifacts.discard()
            console.print(f"[red]✗[/red] {escape(str(exc))}")
            ctx.exit(1)

    return wrapper


def _check_report(report: CostReport) -> None:
    values = (report.signaling, report.delivery, report.total)
    if not all(math.isfinite(v) and v >= 0 for v in values):
        raise InconsistentResultError(f"{report.scheme.value} costs are not finite and nonnegative")
    if not math.isclose(report.total, report.signaling + report.delivery, rel_tol=1e-12):
        raise InconsistentResultError(f"{report.scheme.value} total differs from its components")


def _costs_table(reports: Dict[Scheme, CostReport]) -> Table:
    table = Table(title="Analytic cost (hops·bytes/s)", show_header=True, header_style="bold magenta")
    table.add_column("Scheme", style="cyan")
    table.add_column("Signaling", justify="right")
    table.add_column("Delivery", justify="right")
    table.add_column("Total", justify="right")
    table.add_column("Mean latency", justify="right")
    for scheme, report in reports.items():
        table.add_row(
            scheme.value,
            f"{report.signaling:,.3f}",
            f"{report.delivery:,.1f}",
            f"{report.total:,.1f}",
            f"{report.mean_latency():.3f}",
        )
    return table


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Debug logging')
@click.option('--quiet', '-q', is_flag=True, help='Warnings and errors only')
@click.version_option(__version__, prog_name='mobisim')
def cli(verbose, quiet):
    """📡 mobisim - PMIPv6 vs IP-over-ICN mobility cost simulator."""
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


@cli.command()
@scenario_command
def analytic(scenario: ScenarioConfig, artifacts: Artifacts):
    """Evaluate the closed-form cost model for CONFIG."""
    started = time.perf_counter()
    context = ScenarioContext.build(scenario)
    reports = analytic_reports(scenario, context)
    for report in reports.values():
        _check_report(report)

    artifacts.write('costs.csv', write_costs_csv, reports)
    for scheme, report in reports.items():
        artifacts.write(f'latency_histogram_{scheme.value.lower()}.csv',
                        write_latency_histogram_csv, report.latency_distribution)
    artifacts.write('stationary.csv', write_vector_csv, context.pi.pi, labels=context.pi.nodes)
    artifacts.write('direction_matrix.csv', write_matrix_csv, context.matrix.p,
                    labels=context.matrix.nodes)
    artifacts.write('topology.json', write_topology_json, context.graph)
    _finish(artifacts, 'analytic', scenario, started)

    console.print(_costs_table(reports))
    if Scheme.PMIP in reports and Scheme.ICN in reports:
        pmip, icn = reports[Scheme.PMIP], reports[Scheme.ICN]
        if pmip.signaling > 0 and icn.delivery > 0:
            console.print(
                f"Υ′/Υ = {icn.signaling / pmip.signaling:.3f}   "
                f"Λ/Λ′ = {pmip.delivery / icn.delivery:.3f}"
            )
    console.print(f"[green]✓[/green] Results written to {artifacts.out_dir}")


def _write_simulation(artifacts: Artifacts, prefix: str, result: ScenarioResult,
                      traces: bool) -> None:
    scenario = result.config
    expected = expected_totals(analytic_reports(scenario, result.context), scenario)
    artifacts.write(f'{prefix}replications.csv', write_replications_csv, result.replications)
    artifacts.write(f'{prefix}summary.csv', write_summary_csv, result.aggregate, analytic=expected)
    for scheme in scenario.schemes:
        samples = result.latency_samples(scheme)
        if not samples:
            continue
        name = scheme.value.lower()
        artifacts.write(f'{prefix}latency_samples_{name}.csv', write_latency_samples_csv, samples)
        artifacts.write(f'{prefix}ecdf_{name}.csv', write_ecdf_csv, ecdf(samples))
    if traces:
        artifacts.write(f'{prefix}trace.csv', write_trace_csv, result.replications[0].trace)


def _summary_table(result: ScenarioResult, title: str) -> Table:
    expected = expected_totals(analytic_reports(result.config, result.context), result.config)
    table = Table(title=title, show_header=True, header_style="bold magenta")
    table.add_column("Scheme", style="cyan")
    table.add_column("Metric")
    table.add_column("Mean ± 95% CI", justify="right")
    table.add_column("Analytic", justify="right")
    for scheme, metrics in result.aggregate.items():
        for metric, stat in metrics.items():
            analytic_value = expected.get(scheme, {}).get(metric)
            table.add_row(
                scheme.value,
                metric,
                f"{stat.mean:,.3f} ± {stat.half_width:,.3f}",
                "" if analytic_value is None else f"{analytic_value:,.3f}",
            )
    return table


def _latency_agreement(result: ScenarioResult) -> Optional[float]:
    pmip = result.latency_samples(Scheme.PMIP) if Scheme.PMIP in result.config.schemes else []
    icn = result.latency_samples(Scheme.ICN) if Scheme.ICN in result.config.schemes else []
    if not pmip or not icn:
        return None
    distance = ks_distance(pmip, icn)
    logger.info("Handover latency KS distance PMIP vs ICN: %.4f", distance)
    return distance


@cli.command()
@scenario_command
@click.option('--traces', is_flag=True, help='Write the costed message trace of replication 0')
def simulate(scenario: ScenarioConfig, artifacts: Artifacts, traces: bool):
    """Run replicated simulations of CONFIG (one run per speed with a speed sweep)."""
    started = time.perf_counter()
    if scenario.speeds_sweep:
        points = sweep_speeds(scenario, scenario.speeds_sweep)
        for mph, result in points:
            _write_simulation(artifacts, f'speed-{mph:g}mph/', result, traces)
        artifacts.write('sweep.csv', write_sweep_csv, points)
        _finish(artifacts, 'simulate', scenario, started)
        for mph, result in points:
            console.print(_summary_table(result, f"{mph:g} miles/h"))
    else:
        result = run_scenario(scenario, record_traces=traces)
        _write_simulation(artifacts, '', result, traces)
        _finish(artifacts, 'simulate', scenario, started)
        console.print(_summary_table(result, f"{result.graph.name or 'topology'}, "
                                             f"{scenario.replications} replications"))
        distance = _latency_agreement(result)
        if distance is not None:
            console.print(f"Handover latency KS distance: {distance:.4f}")
    console.print(f"[green]✓[/green] Results written to {artifacts.out_dir}")


def _comparison_table(comparisons: List[Tuple[Any, Comparison]]) -> Table:
    table = Table(title="PMIPv6 / IP-over-ICN", show_header=True, header_style="bold magenta")
    table.add_column("Size", style="cyan")
    table.add_column("PMIP total", justify="right")
    table.add_column("ICN total", justify="right")
    table.add_column("Ratio", justify="right")
    table.add_column("Signaling ratio", justify="right")
    table.add_column("Delivery ratio", justify="right")
    for size, comparison in comparisons:
        total = comparison.row('total')
        table.add_row(
            str(size),
            f"{total.pmip.mean:,.0f}",
            f"{total.icn.mean:,.0f}",
            f"{total.ratio:.3f}",
            f"{comparison.row('signaling').ratio:.3f}",
            f"{comparison.row('delivery').ratio:.3f}",
        )
    return table


@cli.command()
@scenario_command
def compare(scenario: ScenarioConfig, artifacts: Artifacts):
    """Paired PMIPv6 vs IP-over-ICN comparison of CONFIG (one per size with a size sweep)."""
    started = time.perf_counter()
    if scenario.sizes_sweep:
        comparisons: List[Tuple[Any, Comparison]] = list(sweep_sizes(scenario, scenario.sizes_sweep))
    else:
        comparison = compare_schemes(scenario)
        comparisons = [(comparison.result.graph.node_count, comparison)]
    for size, comparison in comparisons:
        if not comparison.handovers_equal:
            raise InconsistentResultError(f"Schemes saw different moves at size {size}")
    artifacts.write('comparison.csv', write_comparison_csv, comparisons)
    _finish(artifacts, 'compare', scenario, started)
    console.print(_comparison_table(comparisons))
    console.print(f"[green]✓[/green] Results written to {artifacts.out_dir}")


@cli.group()
def fixtures():
    """Reserved topologies and shipped presets."""


@fixtures.command('list')
def list_fixtures():
    """List every reserved topology name and scenario preset."""
    table = Table(title="📋 Fixtures and presets", show_header=True, header_style="bold magenta")
    table.add_column("Name", style="cyan")
    table.add_column("Kind", width=10)
    table.add_column("Description")
    for name in sorted(FIXTURES):
        graph = fixture(name)
        table.add_row(
            name,
            "topology",
            f"{graph.node_count} nodes, {len(graph.edges)} edges, anchor {graph.anchor}",
        )
    for name in list_presets():
        table.add_row(name, "preset", load_preset(name).get('description', ''))
    console.print(table)
    console.print(Panel("mobisim analytic|simulate|compare <preset or file> --out DIR",
                        title="Usage", border_style="blue"))


if __name__ == '__main__':
    cli()
