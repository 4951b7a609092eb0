"""
Command-line interface for the multi-scale KAM engine.
"""

import os
import sys
from typing import Iterable, Optional

import click
import structlog
from dotenv import load_dotenv
from rich.console import Console

from .. import __version__
from ..analysis.cli_reports import reports
from ..analysis.report_generator import ReportWriter, dump_json
from ..analysis.verdicts import EXIT_CONFIG, EXIT_INTERNAL
from ..database import ArchiveManager
from ..errors import ConfigError
from ..monitoring import PhaseTimer, StandardPhases
from ..pipeline import RunConfig, emit_config, example_config, load_config, run, with_overrides
from ..pipeline.runner import TOOL_NAME
from .logger import LOG_LEVELS, RunConsole, configure_logging

console = Console()
logger = structlog.get_logger(__name__)


@click.group()
@click.version_option(version=__version__, prog_name=TOOL_NAME)
@click.option('--log-level', type=click.Choice(LOG_LEVELS), default=None,
              help='Log level for stderr (default: $KAM_ENGINE_LOG_LEVEL or warning)')
@click.option('--json-logs', is_flag=True, help='Emit logs as JSON lines')
def cli(log_level: Optional[str], json_logs: bool):
    """Multi-scale KAM engine: conditions, iteration and resonance measure runs."""
    load_dotenv()
    level = log_level or os.environ.get("KAM_ENGINE_LOG_LEVEL", "warning")
    configure_logging(level if level in LOG_LEVELS else "warning", json_logs)


def run_options(func):
    func = click.option('--mode', help="Override the run mode ('full', 'frequency_preserving:<n1>', 'isoenergetic:<n1>')")(func)
    func = click.option('--out', type=click.Path(file_okay=False), help='Output directory (overrides output.dir)')(func)
    func = click.option('--seed', type=int, help='Seed of the measure sampler')(func)
    func = click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                        help='Run config JSON (default: the built-in co-orbital example)')(func)
    return func


def _prepare(config_path: Optional[str], seed: Optional[int], out: Optional[str], mode: Optional[str],
             need_measure: bool = False) -> RunConfig:
    try:
        config = load_config(config_path) if config_path else example_config()
        out = out or os.environ.get("KAM_ENGINE_OUTPUT_DIR")
        config = with_overrides(config, seed=seed, out=out, mode=mode)
        if need_measure and config.measure is None:
            raise ConfigError(["measure: the measure command needs a measure block in the config"])
    except ConfigError as e:
        RunConsole(console).show_config_errors(e.errors)
        sys.exit(EXIT_CONFIG)
    return config


def _archive(report: dict, output_dir: str) -> None:
    try:
        run_id = ArchiveManager().archive_run(report, output_dir)
        console.print(f"[blue]Archived as run {run_id}[/blue]")
    except FileNotFoundError as e:
        logger.warning("archive_disabled", reason=str(e))
        console.print(f"[yellow]Archiving skipped: {e}[/yellow]")


def _execute(config: RunConfig, stages: Iterable[str]) -> None:
    timer = PhaseTimer()
    try:
        report = run(config, stages, timer)
        writer = ReportWriter(config.output.dir)
        with timer.phase(StandardPhases.REPORT):
            document = report.to_dict()
            writer.write(document, tables=config.output.tables, html=config.output.html)
        writer.write_runtime(timer.to_dict())
        if config.output.archive:
            _archive(document, config.output.dir)
    except Exception as e:
        logger.error("run_failed", error=str(e), error_type=type(e).__name__)
        console.print(f"[red]Run failed: {e}[/red]")
        sys.exit(EXIT_INTERNAL)

    RunConsole(console).show_report(document)
    console.print(f"[green]Report written to {config.output.dir}[/green]")
    sys.exit(report.exit_code)


@cli.command()
@run_options
def check(config_path: str, seed: int, out: str, mode: str):
    """Check the non-degeneracy conditions required by the mode."""
    _execute(_prepare(config_path, seed, out, mode), ["conditions"])


@cli.command(name="run")
@run_options
def run_command(config_path: str, seed: int, out: str, mode: str):
    """Run conditions, the KAM iteration and (if configured) the measure fit."""
    _execute(_prepare(config_path, seed, out, mode), ["conditions", "iteration", "measure"])


@cli.command()
@run_options
def measure(config_path: str, seed: int, out: str, mode: str):
    """Estimate the resonant set measure and fit its exponent."""
    _execute(_prepare(config_path, seed, out, mode, need_measure=True), ["measure"])


@cli.command()
@click.option('--out', type=click.Path(dir_okay=False), help='Write the config to this file instead of stdout')
def example(out: str):
    """Emit the config of the built-in co-orbital example."""
    text = emit_config(example_config())
    if out:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(text)
        console.print(f"[green]Example config written to {out}[/green]")
    else:
        click.echo(text, nl=False)


@cli.command()
@click.option('--limit', default=10, help='Number of runs to show')
@click.option('--run', 'run_id', type=int, help='Print the config of this archived run instead of the list')
def history(limit: int, run_id: Optional[int]):
    """List archived runs, or print the config of one of them."""
    try:
        archive = ArchiveManager()
        if run_id is not None:
            click.echo(dump_json(archive.run_config(run_id)), nl=False)
            return
        runs = archive.list_runs(limit=limit)
        info = archive.get_database_info()
    except (FileNotFoundError, ConfigError) as e:
        console.print(f"[red]{e}[/red]")
        sys.exit(EXIT_CONFIG)
    except KeyError as e:
        console.print(f"[red]{e.args[0]}[/red]")
        sys.exit(EXIT_CONFIG)
    RunConsole(console).show_history(runs, info)


@cli.command()
def backup():
    """Create a backup of the run archive."""
    try:
        backup_path = ArchiveManager().backup_database()
        console.print(f"[green]Archive backed up to: {backup_path}[/green]")
    except Exception as e:
        console.print(f"[red]Backup failed: {e}[/red]")
        sys.exit(EXIT_INTERNAL)


cli.add_command(reports)


if __name__ == '__main__':
    cli()
